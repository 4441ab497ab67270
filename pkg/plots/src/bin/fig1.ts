import { runFigure } from "../cli.js";

runFigure("ber-vs-snr", "BER versus SNR (MMSE detectors)");
