import { runFigure } from "../cli.js";

runFigure("ber-vs-users", "BER versus number of users (MMSE detectors)");
