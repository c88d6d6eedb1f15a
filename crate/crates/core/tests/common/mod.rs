#![allow(dead_code)]

/// Parse/print round-trip corpus.
pub const CORPUS: [&str; 50] = [
    "p*V - N*kB*T",
    "U - 3/2*N*kB*T",
    "p",
    "T",
    "2",
    "0.5",
    "1e-3",
    "2.5E+2 * V",
    "-p",
    "--T",
    "-2^2",
    "2^3^2",
    "(2^3)^2",
    "-(2^2)",
    "kB",
    "p*V*T",
    "p*(V*T)",
    "p - V - T",
    "p - (V - T)",
    "p / V / T",
    "p / (V / T)",
    "p + V * T",
    "(p + V) * T",
    "U / (N*kB)",
    "exp(S)",
    "ln(V)",
    "exp(-U/(N*kB*T))",
    "ln(V) - ln(U)",
    "exp(ln(V))",
    "V^(2/3)",
    "V^-2",
    "V^(-2)",
    "(-V)^2",
    "-V^2",
    "S*T - U - p*V",
    "U + p*V - T*S",
    "3/2*N*kB*T - U",
    "2/3*U/V - p",
    "N*kB*T/V - p",
    "V*p - N*kB*T",
    "p*V/(N*kB*T) - 1",
    "(((p)))",
    "p*V-N*kB*T",
    "  p *  V  ",
    "exp(2*S/(3*N*kB))",
    "U*exp(-2*S/(3*N*kB))*V^(2/3)",
    "1 - -1",
    "2 * -T",
    "T^2 - p^2 + S^2 - V^2",
    "ln(exp(1) + U) / 2",
];
