import { runFigure } from "../cli.js";

runFigure("convergence", "MSE versus symbols (RLS adaptation, MMSE references dotted)");
