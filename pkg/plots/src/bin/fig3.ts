import { runFigure } from "../cli.js";

runFigure("convergence", "MSE versus symbols (SG adaptation, MMSE references dotted)");
