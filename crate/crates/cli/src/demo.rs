//! Worked examples on three arguments, each compared with the published values.

use argbayes::accept::{Evaluator, ModelConfig, ParameterFamily};
use argbayes::af::{ArgSet, ArgumentNames, Semantics};
use argbayes::bayes::{exact_posterior, ml_estimate, sequential_update};
use argbayes::space::{AttackAssignment, AttackVariableSpace, Observation};
use argbayes::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Case {
    Table1,
    Example6,
    Figure3,
    Theorem2,
    All,
}

pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

const TOLERANCE: f64 = 1e-12;

/// Table columns: ∅, {a}, {b}, {c}, {a,b}, {a,c}, {b,c}, {a,b,c}.
const COLUMNS: [u32; 8] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

/// Table rows as `(ab, ac, bc)` attack bits.
const ROWS: [&str; 8] = ["000", "100", "010", "110", "001", "101", "011", "111"];

/// Linear parameters, in thirds.
const LINEAR_THIRDS: [[u32; 8]; 8] = [
    [0, 1, 1, 1, 2, 2, 2, 3],
    [2, 2, 2, 3, 1, 3, 3, 2],
    [2, 2, 3, 2, 3, 1, 3, 2],
    [3, 3, 2, 2, 2, 2, 3, 2],
    [2, 3, 2, 2, 3, 3, 1, 2],
    [3, 2, 3, 2, 2, 3, 2, 2],
    [3, 2, 2, 3, 3, 2, 2, 2],
    [3, 3, 3, 3, 2, 2, 2, 1],
];

/// Exponential parameters: `0`, `L = (w-1)/(w³-1)`, `H = (w²-1)/(w³-1)`, `1`.
const EXPONENTIAL: [&str; 8] = [
    "0LLLHHH1", "HHH1L11H", "HH1H1L1H", "11HHHH1H", "H1HH11LH", "1H1HH1HH", "1HH11HHH", "1111HHHL",
];

const CHAIN_PRIORS: [f64; 3] = [0.1, 0.15, 0.2];

/// Unnormalized posterior after 1, 2 and 3 observations, per row, as
/// exponents of `(1/7, 3/7)` times the prior.
const CHAIN_LISTED: [[(i32, i32); 8]; 3] = [
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

pub fn run(case: Case) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    if matches!(case, Case::Table1 | Case::All) {
        checks.extend(table1()?);
    }
    if matches!(case, Case::Example6 | Case::All) {
        checks.extend(example6()?);
    }
    if matches!(case, Case::Figure3 | Case::All) {
        checks.extend(figure3()?);
    }
    if matches!(case, Case::Theorem2 | Case::All) {
        checks.extend(theorem2()?);
    }
    Ok(checks)
}

fn bits(s: &str) -> AttackAssignment {
    AttackAssignment::parse_bitstring(s).expect("static bitstring")
}

fn triangle(family: ParameterFamily, priors: [f64; 3]) -> Result<Evaluator> {
    let space = AttackVariableSpace::symmetric(3)?.with_priors(priors.to_vec())?;
    Ok(Evaluator::new(
        space,
        ModelConfig::new(Semantics::Complete, family),
    ))
}

fn column_label(names: &ArgumentNames, j: usize) -> String {
    names.format_set(ArgSet(COLUMNS[j])).replace(", ", ",")
}

fn table1() -> Result<Vec<Check>> {
    let names = ArgumentNames::alphabetic(3);
    let linear = triangle(ParameterFamily::Linear, [0.5; 3])?;
    let w = 2.0;
    let exponential = triangle(ParameterFamily::exponential(w)?, [0.5; 3])?;
    let symbol = |c: char| match c {
        '0' => 0.0,
        'L' => (w - 1.0) / (w * w * w - 1.0),
        'H' => (w * w - 1.0) / (w * w * w - 1.0),
        _ => 1.0,
    };

    let header: Vec<String> = (0..8).map(|j| column_label(&names, j)).collect();
    println!("att(ab,ac,bc)\t{}", header.join("\t"));
    let (mut lin_ok, mut exp_ok) = (0, 0);
    for (i, row) in ROWS.iter().enumerate() {
        let att = bits(row);
        let mut cells = Vec::new();
        for (j, &d) in COLUMNS.iter().enumerate() {
            let got = linear.theta(ArgSet(d), &att)?;
            let thirds = (got * 3.0).round();
            cells.push(match thirds as u32 {
                0 => "0".to_string(),
                3 => "1".to_string(),
                k => format!("{k}/3"),
            });
            if (got - LINEAR_THIRDS[i][j] as f64 / 3.0).abs() < TOLERANCE {
                lin_ok += 1;
            }
            let expected = symbol(EXPONENTIAL[i].as_bytes()[j] as char);
            if (exponential.theta(ArgSet(d), &att)? - expected).abs() < TOLERANCE {
                exp_ok += 1;
            }
        }
        println!("{row}\t{}", cells.join("\t"));
    }
    Ok(vec![
        Check::new(
            "table1 linear",
            lin_ok == 64,
            format!("{lin_ok}/64 entries match"),
        ),
        Check::new(
            "table1 exponential w=2",
            exp_ok == 64,
            format!("{exp_ok}/64 entries match"),
        ),
    ])
}

fn cycle(n: usize) -> Vec<Observation> {
    (0..n)
        .map(|k| Observation::accepted(ArgSet::singleton(k % 3)))
        .collect()
}

fn prior_of(row: &str) -> f64 {
    row.chars()
        .zip(CHAIN_PRIORS)
        .map(|(c, l)| if c == '1' { l } else { 1.0 - l })
        .product()
}

fn example6() -> Result<Vec<Check>> {
    let eval = triangle(ParameterFamily::exponential(2.0)?, CHAIN_PRIORS)?;
    let top = bits("111");
    let mut checks = Vec::new();
    for (k, listed) in CHAIN_LISTED.iter().enumerate() {
        let n = k + 1;
        let post = exact_posterior(&cycle(n), &eval, 20)?;
        let mut worst: f64 = 0.0;
        for (i, &(sevenths, three_sevenths)) in listed.iter().enumerate() {
            let expected = (1.0f64 / 7.0).powi(sevenths)
                * (3.0f64 / 7.0).powi(three_sevenths)
                * prior_of(ROWS[i])
                / prior_of("111");
            let got = post.probability(&bits(ROWS[i])) / post.probability(&top);
            worst = worst.max((got / expected - 1.0).abs());
        }
        checks.push(Check::new(
            &format!("example6 N={n}"),
            worst < TOLERANCE,
            format!("largest relative ratio error {worst:.2e}"),
        ));
    }
    for (label, n) in [("20 observations", 20), ("20 cycles", 60)] {
        let p = exact_posterior(&cycle(n), &eval, 20)?.probability(&top);
        checks.push(Check::new(
            &format!("example6 {label}"),
            p >= 0.99,
            format!("p(111) = {p:.6}"),
        ));
    }
    Ok(checks)
}

fn figure3() -> Result<Vec<Check>> {
    let eval = triangle(ParameterFamily::exponential(2.0)?, CHAIN_PRIORS)?;
    let obs = cycle(20);
    println!("N\t{}", ROWS.join("\t"));
    let mut post = exact_posterior(&[], &eval, 20)?;
    let mut worst_tv: f64 = 0.0;
    for n in 0..=obs.len() {
        if n > 0 {
            post = sequential_update(&post, &obs[n - 1], &eval)?;
            worst_tv = worst_tv.max(post.total_variation(&exact_posterior(&obs[..n], &eval, 20)?));
        }
        let row: Vec<String> = ROWS
            .iter()
            .map(|r| format!("{:.4}", post.probability(&bits(r))))
            .collect();
        println!("{n}\t{}", row.join("\t"));
    }
    let p = post.probability(&bits("111"));
    Ok(vec![
        Check::new(
            "figure3 sequential = batch",
            worst_tv < TOLERANCE,
            format!("largest total variation {worst_tv:.2e}"),
        ),
        Check::new(
            "figure3 converges to (1,1,1)",
            p >= 0.99,
            format!("p(111) = {p:.6}"),
        ),
    ])
}

fn theorem2() -> Result<Vec<Check>> {
    let space = AttackVariableSpace::directed(2, false)?;
    let eval = Evaluator::new(
        space,
        ModelConfig::new(Semantics::Complete, ParameterFamily::exponential(2.0)?),
    );
    let obs = [
        Observation::accepted(ArgSet::EMPTY),
        Observation::accepted(ArgSet(0b11)),
    ];
    let mut checks = Vec::new();
    for (row, expected, shown) in [
        ("00", 0.0, "0"),
        ("10", 1.0 / 9.0, "1/9"),
        ("01", 1.0 / 9.0, "1/9"),
        ("11", 1.0 / 3.0, "1/3"),
    ] {
        let got = eval.log_likelihood(&obs, &bits(row))?.exp();
        checks.push(Check::new(
            &format!("theorem2 likelihood {row}"),
            (got - expected).abs() < TOLERANCE,
            format!("{got:.12} (expected {shown})"),
        ));
    }
    let ml = ml_estimate(&obs, &eval, 20)?;
    let shown: Vec<String> = ml.iter().map(|a| a.to_bitstring()).collect();
    checks.push(Check::new(
        "theorem2 ML estimate is the mutual attack",
        ml == vec![bits("11")],
        format!("ML = {{{}}}", shown.join(", ")),
    ));
    Ok(checks)
}
