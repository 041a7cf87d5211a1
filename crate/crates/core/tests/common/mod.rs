//! Values transcribed from the published worked examples, shared by several
//! test targets.

#![allow(dead_code)]

use argbayes::af::ArgSet;
use argbayes::space::AttackAssignment;

/// Subsets of `{a, b, c}` in table column order.
pub const COLUMNS: [u32; 8] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

/// Attack assignments `(ab, ac, bc)` in table row order.
pub const ROWS: [&str; 8] = ["000", "100", "010", "110", "001", "101", "011", "111"];

/// Linear parameters as `(numerator, denominator)` with denominator 3.
pub const LINEAR: [[u32; 8]; 8] = [
    [0, 1, 1, 1, 2, 2, 2, 3],
    [2, 2, 2, 3, 1, 3, 3, 2],
    [2, 2, 3, 2, 3, 1, 3, 2],
    [3, 3, 2, 2, 2, 2, 3, 2],
    [2, 3, 2, 2, 3, 3, 1, 2],
    [3, 2, 3, 2, 2, 3, 2, 2],
    [3, 2, 2, 3, 3, 2, 2, 2],
    [3, 3, 3, 3, 2, 2, 2, 1],
];

/// Exponential parameters by symbol: `0`, `L = (w-1)/(w^3-1)`,
/// `H = (w^2-1)/(w^3-1)`, `1`.
pub const EXPONENTIAL: [&str; 8] = [
    "0LLLHHH1", "HHH1L11H", "HH1H1L1H", "11HHHH1H", "H1HH11LH", "1H1HH1HH", "1HH11HHH", "1111HHHL",
];

pub fn exponential_symbol(symbol: char, w: f64) -> f64 {
    match symbol {
        '0' => 0.0,
        'L' => (w - 1.0) / (w.powi(3) - 1.0),
        'H' => (w * w - 1.0) / (w.powi(3) - 1.0),
        '1' => 1.0,
        other => panic!("unknown symbol {other}"),
    }
}

pub fn row(i: usize) -> AttackAssignment {
    AttackAssignment::parse_bitstring(ROWS[i]).unwrap()
}

pub fn column(j: usize) -> ArgSet {
    ArgSet(COLUMNS[j])
}

/// Priors `(λ_ab, λ_ac, λ_bc)` of the posterior-chain example.
pub const CHAIN_PRIORS: [f64; 3] = [0.1, 0.15, 0.2];

/// Exponent of `3/7` in the unnormalized posterior of `att` after `n`
/// observations cycling `{a}`, `{b}`, `{c}`; `None` stands for the `(1/7)^n`
/// row `(0,0,0)`.
pub fn chain_exponent(att: &str, n: usize) -> Option<usize> {
    Some(match att {
        "000" => return None,
        "100" | "011" => n - n / 3,
        "010" | "101" => n - (n + 1) / 3,
        "110" | "001" => n - n.div_ceil(3),
        "111" => 0,
        other => panic!("unknown assignment {other}"),
    })
}

/// The unnormalized posterior mass listed for `att` after `n` observations.
pub fn chain_mass(att: &str, n: usize, priors: &[f64; 3]) -> f64 {
    let likelihood = match chain_exponent(att, n) {
        None => (1.0f64 / 7.0).powi(n as i32),
        Some(k) => (3.0f64 / 7.0).powi(k as i32),
    };
    let prior: f64 = att
        .chars()
        .zip(priors)
        .map(|(c, &l)| if c == '1' { l } else { 1.0 - l })
        .product();
    likelihood * prior
}

/// The explicit lists for one, two and three observations, written as
/// `(exponent of 1/7, exponent of 3/7)` per row in table order.
pub const CHAIN_LISTED: [[(i32, i32); 8]; 3] = [
    [
        (1, 0),
        (0, 1),
        (0, 1),
        (0, 0),
        (0, 0),
        (0, 1),
        (0, 1),
        (0, 0),
    ],
    [
        (2, 0),
        (0, 2),
        (0, 1),
        (0, 1),
        (0, 1),
        (0, 1),
        (0, 2),
        (0, 0),
    ],
    [
        (3, 0),
        (0, 2),
        (0, 2),
        (0, 2),
        (0, 2),
        (0, 2),
        (0, 2),
        (0, 0),
    ],
];
