//! `lantern`: factor planar monodromies, build model diagrams, certify L-spaces and run the
//! d₃ obstruction rules. Exit status: 0 success, 1 negative verdict, 2 usage or input error.

use std::fs;
use std::io::{Read as _, Write as _};
use std::path::Path;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lantern::contact::{self, FillingData, HypothesisSet, LegendrianKnotData};
use lantern::graph::{consistency_check, graph_from_model};
use lantern::kirby::{
    chain_slide, diagram_from_factorization, linking_matrix, lspace_certificate, FramedDiagram,
    ModelDiagram, Verdict,
};
use lantern::matrix::is_diagonalizable_over_integers;
use lantern::oracle::words_equal;
use lantern::parse::parse_twist_word;
use lantern::rewrite::factorize;
use num_bigint::BigInt;
use rayon::prelude::*;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lantern", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor a twist word into δ and γ powers followed by left-handed twists.
    Factorize {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        word: String,
    },
    /// Decide whether two twist words give the same mapping class.
    Verify {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
    },
    /// Model diagram Z(n; p; q), given directly or as the slid diagram of a positive word.
    Model {
        #[arg(long)]
        n: u32,
        #[arg(long, value_delimiter = ',', conflicts_with = "word")]
        p: Vec<u32>,
        #[arg(long, value_delimiter = ',', required_unless_present = "word")]
        q: Vec<u32>,
        /// Positive twist word to convert instead of --p/--q.
        #[arg(long)]
        word: Option<String>,
        #[arg(long, value_enum, default_value_t = Emit::Json)]
        emit: Emit,
    },
    /// L-space certificate for Z(n; p; q).
    LspaceCert {
        #[arg(long)]
        n: u32,
        #[arg(long, value_delimiter = ',')]
        p: Vec<u32>,
        #[arg(long, value_delimiter = ',')]
        q: Vec<u32>,
    },
    /// Certificates and determinant checks over the grid n ≤ max-n, parameters ≤ max-param.
    Sweep {
        #[arg(long, default_value_t = 3)]
        max_n: u32,
        #[arg(long, default_value_t = 3)]
        max_param: u32,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Determinant, signature, inertia and diagonalizability of a symmetric matrix.
    Invariants {
        /// JSON file ("-" for stdin): a matrix [[..]] or {"components": [..], "matrix": [[..]]}.
        #[arg(long)]
        matrix: String,
    },
    /// d₃ from filling data, or from contact (−1)-surgery on a Legendrian knot with --tb.
    D3 {
        #[arg(long, required_unless_present = "tb")]
        matrix: Option<String>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        rot: Vec<i64>,
        #[arg(long, allow_negative_numbers = true)]
        chi: Option<i64>,
        /// Defaults to the signature of the matrix.
        #[arg(long, allow_negative_numbers = true)]
        sigma: Option<i64>,
        #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["matrix", "chi", "sigma"])]
        tb: Option<i64>,
    },
    /// Run the obstruction rules on a JSON hypothesis file.
    Obstruct {
        #[arg(long)]
        hypotheses: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    /// ModelDiagram JSON with the determinant report.
    Json,
    /// Linking matrix JSON.
    Matrix,
    /// DOT multigraph.
    Graph,
    /// JSON edge-multiplicity map.
    GraphJson,
}

/// Failure modes mapped onto exit codes 1 and 2.
enum Failure {
    Negative(String),
    Input(String),
}

impl From<lantern::Error> for Failure {
    fn from(e: lantern::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<Output, Failure>;

struct Output {
    body: String,
    negative: bool,
}

impl Output {
    fn json(v: &Value, negative: bool) -> Self {
        Output {
            body: serde_json::to_string_pretty(v).expect("json"),
            negative,
        }
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    let mut s = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut s).map(|_| ())
    } else {
        fs::read_to_string(Path::new(path)).map(|t| s = t)
    };
    res.map_err(|e| Failure::Input(format!("{path}: {e}")))?;
    Ok(s)
}

fn read_diagram(path: &str) -> Result<FramedDiagram, Failure> {
    let text = read_input(path)?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
    let v = if v.is_array() {
        json!({ "matrix": v })
    } else {
        v
    };
    serde_json::from_value(v).map_err(|e| Failure::Input(format!("{path}: {e}")))
}

fn model_from(n: u32, p: Vec<u32>, q: Vec<u32>) -> Result<ModelDiagram, Failure> {
    if q.len() != n as usize {
        return Err(Failure::Input(format!(
            "--n {n} needs {n} values in --q, got {}",
            q.len()
        )));
    }
    Ok(ModelDiagram::new(p, q)?)
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Factorize { n, word } => {
            let w = parse_twist_word(&word, n)?;
            let f = factorize(&w)?;
            let verified = f.verify_against(&w)?;
            let v = json!({
                "input": w,
                "factorization": f,
                "normal_form": f.reassemble().to_string(),
                "positive": f.is_positive(),
                "oracle_verified": verified,
            });
            Ok(Output::json(&v, !verified))
        }
        Command::Verify { n, lhs, rhs } => {
            let (a, b) = (parse_twist_word(&lhs, n)?, parse_twist_word(&rhs, n)?);
            let equal = words_equal(&a, &b)?;
            let v = json!({ "lhs": a.to_string(), "rhs": b.to_string(), "equal": equal });
            Ok(Output::json(&v, !equal))
        }
        Command::Model {
            n,
            p,
            q,
            word,
            emit,
        } => {
            let m = match word {
                Some(text) => {
                    let f = factorize(&parse_twist_word(&text, n)?)?;
                    if !f.is_positive() {
                        return Err(Failure::Negative(format!(
                            "monodromy is not positive: tail {}",
                            f.tail()
                        )));
                    }
                    chain_slide(&diagram_from_factorization(&f)?)?
                }
                None => model_from(n, p, q)?,
            };
            match emit {
                Emit::Json => {
                    let report = consistency_check(&m);
                    let v = json!({ "model": m, "det": to_json(&report)["linking_det"], "consistency": report });
                    Ok(Output::json(&v, !report.passed))
                }
                Emit::Matrix => Ok(Output::json(&to_json(&linking_matrix(&m)), false)),
                Emit::Graph => Ok(Output {
                    body: graph_from_model(&m).to_dot(),
                    negative: false,
                }),
                Emit::GraphJson => Ok(Output::json(&to_json(&graph_from_model(&m)), false)),
            }
        }
        Command::LspaceCert { n, p, q } => {
            let cert = lspace_certificate(&model_from(n, p, q)?)?;
            Ok(Output::json(
                &to_json(&cert),
                cert.verdict != Verdict::Success,
            ))
        }
        Command::Sweep {
            max_n,
            max_param,
            jobs,
        } => sweep(max_n, max_param, jobs),
        Command::Invariants { matrix } => {
            let d = read_diagram(&matrix)?;
            let inv = d.invariants();
            let diag =
                if inv.b2_zero == 0 && (inv.is_positive_definite() || inv.is_negative_definite()) {
                    Value::Bool(is_diagonalizable_over_integers(d.matrix())?)
                } else {
                    Value::Null
                };
            let mut v = to_json(&inv);
            v["rank"] = json!(inv.rank());
            v["diagonalizable"] = diag;
            Ok(Output::json(&v, false))
        }
        Command::D3 {
            matrix,
            rot,
            chi,
            sigma,
            tb,
        } => {
            let f = match tb {
                Some(tb) => {
                    let [r] = rot[..] else {
                        return Err(Failure::Input("--tb needs exactly one --rot value".into()));
                    };
                    contact::legendrian_surgery_presentation(LegendrianKnotData::new(tb, r)?)?
                }
                None => {
                    let d = read_diagram(matrix.as_deref().expect("required by clap"))?;
                    let chi = chi
                        .ok_or_else(|| Failure::Input("--chi is required with --matrix".into()))?;
                    let sigma = sigma.unwrap_or_else(|| d.invariants().signature);
                    let rot = rot.iter().map(|&x| BigInt::from(x)).collect();
                    FillingData::new(d.matrix().clone(), rot, chi, sigma)?
                }
            };
            let c1 = contact::c1_squared(&f.matrix, &f.rot)?;
            let d3 = contact::d3_from_filling(&f)?;
            let v = json!({ "filling": f, "c1_squared": c1.to_string(), "d3": d3.to_string() });
            Ok(Output::json(&v, false))
        }
        Command::Obstruct { hypotheses } => {
            let text = read_input(&hypotheses)?;
            let h: HypothesisSet = serde_json::from_str(&text)
                .map_err(|e| Failure::Input(format!("{hypotheses}: {e}")))?;
            let report = contact::obstruction_report(&h)?;
            Ok(Output::json(&to_json(&report), report.obstructed))
        }
    }
}

fn grid(max_n: u32, max_param: u32) -> Vec<ModelDiagram> {
    let mut out = Vec::new();
    for n in 1..=max_n as usize {
        let mut tuples: Vec<Vec<u32>> = vec![vec![]];
        for _ in 0..2 * n - 1 {
            tuples = tuples
                .into_iter()
                .flat_map(|t| (1..=max_param).map(move |x| [t.as_slice(), &[x]].concat()))
                .collect();
        }
        for t in tuples {
            let (p, q) = t.split_at(n - 1);
            out.push(ModelDiagram::new(p.to_vec(), q.to_vec()).expect("grid values are valid"));
        }
    }
    out
}

fn sweep(max_n: u32, max_param: u32, jobs: usize) -> Outcome {
    if max_n == 0 || max_param == 0 {
        return Err(Failure::Input(
            "--max-n and --max-param must be at least 1".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::Input(e.to_string()))?;
    let models = grid(max_n, max_param);
    let results: Vec<(ModelDiagram, bool, bool)> = pool.install(|| {
        models
            .par_iter()
            .map(|m| {
                let cert = lspace_certificate(m).is_ok_and(|c| c.verdict == Verdict::Success);
                (m.clone(), cert, consistency_check(m).passed)
            })
            .collect()
    });
    let failing: Vec<Value> = results
        .iter()
        .filter(|(_, c, d)| !(*c && *d))
        .map(|(m, c, d)| json!({ "model": m, "certificate": c, "determinants": d }))
        .collect();
    let v = json!({ "models": results.len(), "failures": failing.len(), "failing": failing });
    Ok(Output::json(&v, !failing.is_empty()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            // a closed pipe downstream is not our failure
            let mut stdout = std::io::stdout().lock();
            let _ = write!(stdout, "{}", out.body);
            if !out.body.ends_with('\n') {
                let _ = writeln!(stdout);
            }
            ExitCode::from(u8::from(out.negative))
        }
        Err(Failure::Negative(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
