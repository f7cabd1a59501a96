//! Batch CLI over the exact deformation-theory library: JSON in, canonical
//! JSON report out. Exit codes: 0 = ok, 1 = violations found, 2 = error
//! (parse/cap/precondition). Reports contain exact rationals only.

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

use mcstack_core::coefficients::ArtinRing;
use mcstack_core::descent::{cech_cohomology, twisted_form_class, TwistedFormClass};
use mcstack_core::dgla::mc_residual;
use mcstack_core::hochschild::{hochschild_cohomology, mu_from_star, HochschildDgla};
use mcstack_core::report as rj;
use mcstack_core::selftest;
use mcstack_core::stacks::{
    classify_first_order, strictify, total_complex_h1, validate_gstack, validate_one_morphism,
};
use mcstack_core::CoreError;

#[derive(Parser)]
#[command(
    name = "mcstack",
    about = "Exact Deligne 2-groupoid and descent calculations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input JSON path (required by every command except selftest)
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Artin ring truncation override
    #[arg(long = "N", global = true)]
    n: Option<usize>,
    /// Cosimplicial degree cap
    #[arg(long = "n-cap", global = true)]
    n_cap: Option<usize>,
    /// Simplex object cap
    #[arg(long = "d-cap", global = true)]
    d_cap: Option<usize>,
    /// Hochschild arity cap
    #[arg(long = "arity-cap", global = true)]
    arity_cap: Option<usize>,
    /// Seed for the randomized suites
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dgla / algebra / descent datum / stack input
    Validate,
    /// Maurer-Cartan residual and associativity of a star product
    Mc,
    /// Gauge-act on a Maurer-Cartan element and check the conjugation identity
    Gauge,
    /// Hochschild cohomology dimensions (full and normalized)
    Hochschild,
    /// Čech cohomology of a cover
    Cech,
    /// Twisted-form class of a descent datum in Ȟ²(U; O^×)
    Class,
    /// Strictify a stack over G(A)
    Strictify,
    /// First-order deformation classes of a descent datum
    Classify,
    /// Run the seeded randomized invariant suite
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, code) = run(&cli);
    let text = rj::canonical_string(&report);
    match &cli.out {
        Some(path) => {
            if std::fs::write(path, text + "\n").is_err() {
                eprintln!("cannot write report");
                return ExitCode::from(2);
            }
        }
        None => println!("{text}"),
    }
    ExitCode::from(code)
}

fn run(cli: &Cli) -> (Value, u8) {
    let name = command_name(&cli.command);
    match dispatch(cli) {
        Ok((payload, witnesses)) => {
            let status = if witnesses.is_empty() {
                "ok"
            } else {
                "violations"
            };
            let report = json!({
                "command": name,
                "status": status,
                "payload": payload,
                "witnesses": witnesses,
            });
            (report, u8::from(!witnesses.is_empty()))
        }
        Err(e) => {
            let report = json!({
                "command": name,
                "status": "error",
                "payload": {"message": e.to_string()},
                "witnesses": [],
            });
            (report, 2)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Validate => "validate",
        Command::Mc => "mc",
        Command::Gauge => "gauge",
        Command::Hochschild => "hochschild",
        Command::Cech => "cech",
        Command::Class => "class",
        Command::Strictify => "strictify",
        Command::Classify => "classify",
        Command::Selftest => "selftest",
    }
}

fn load_input(cli: &Cli) -> Result<Value, CoreError> {
    let path = cli
        .input
        .as_ref()
        .ok_or_else(|| CoreError::Invalid("--input is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CoreError::Parse(format!("bad JSON: {e}")))
}

type Outcome = (Value, Vec<Value>);

fn build_gmat(
    datum: &std::rc::Rc<mcstack_core::descent::DescentDatum>,
    cli: &Cli,
) -> Result<mcstack_core::gmat::GMat, CoreError> {
    mcstack_core::gmat::GMat::new(
        datum.clone(),
        cli.d_cap.unwrap_or(1),
        cli.n_cap.unwrap_or(3).max(3),
        cli.arity_cap.unwrap_or(3).max(3),
    )
}

fn dispatch(cli: &Cli) -> Result<Outcome, CoreError> {
    match &cli.command {
        Command::Selftest => {
            let seed = cli.seed.unwrap_or(0);
            let suite = selftest::run_suite(seed);
            let mut props = Vec::new();
            let mut witnesses = Vec::new();
            for p in &suite.properties {
                props.push(json!({
                    "property": p.name,
                    "instances": p.instances,
                    "failures": p.failures,
                }));
                if p.failures > 0 {
                    witnesses.push(json!({
                        "property": p.name,
                        "witness": p.witness.clone().unwrap_or_default(),
                    }));
                }
            }
            Ok((json!({"seed": seed, "properties": props}), witnesses))
        }
        Command::Validate => {
            let input = load_input(cli)?;
            let kind = input
                .get("kind")
                .and_then(|k| k.as_str())
                .ok_or_else(|| CoreError::Parse("validate needs a \"kind\" field".into()))?;
            match kind {
                "dgla" => {
                    let ring = ArtinRing::new(cli.n.unwrap_or(2))?;
                    let g = rj::dgla_from_json(&input, ring)?;
                    let violations = g.validate();
                    Ok((
                        json!({"kind": "dgla", "violations": violations.len()}),
                        violations.into_iter().map(Value::String).collect(),
                    ))
                }
                "algebra" => match rj::algebra_from_json(&input) {
                    Ok(_) => Ok((json!({"kind": "algebra", "violations": 0}), vec![])),
                    Err(e) => Ok((
                        json!({"kind": "algebra", "violations": 1}),
                        vec![Value::String(e.to_string())],
                    )),
                },
                "cosimplicial" => {
                    let v = rj::cosimplicial_from_json(&input)?;
                    let max_level = cli.n_cap.unwrap_or(v.n_cap()).min(v.n_cap());
                    let violations = v.validate_functorial(max_level);
                    Ok((
                        json!({"kind": "cosimplicial", "violations": violations.len()}),
                        violations.into_iter().map(Value::String).collect(),
                    ))
                }
                "descent" => {
                    let datum = rj::descent_datum_from_json(&input)?;
                    let violations = datum.validate();
                    Ok((
                        json!({"kind": "descent", "violations": violations.len()}),
                        violations.into_iter().map(Value::String).collect(),
                    ))
                }
                "gstack" => {
                    let datum = rj::descent_datum_from_json(&input)?;
                    let g = build_gmat(&datum, cli)?;
                    let stack = rj::gstack_from_json(
                        &g,
                        input.get("stack").ok_or_else(|| {
                            CoreError::Parse("gstack input needs \"stack\"".into())
                        })?,
                    )?;
                    let violations = validate_gstack(&g, &stack);
                    Ok((
                        json!({"kind": "gstack", "violations": violations.len()}),
                        violations.into_iter().map(Value::String).collect(),
                    ))
                }
                other => Err(CoreError::Parse(format!("unknown kind {other}"))),
            }
        }
        Command::Mc => {
            let input = load_input(cli)?;
            let star = rj::star_from_json(&input)?;
            let h = HochschildDgla::new(star.algebra.clone(), star.ring, 3);
            let mu = mu_from_star(&star);
            let residual = mc_residual(&h, &mu)?;
            let witness = star.associativity_witness();
            let mut witnesses = Vec::new();
            if let Some((i, j, k)) = witness {
                witnesses.push(json!({"associativity_fails_at": [i, j, k]}));
            }
            if !residual.is_zero() {
                witnesses.push(json!("mc residual is nonzero"));
            }
            Ok((
                json!({
                    "residual_zero": residual.is_zero(),
                    "associative": witness.is_none(),
                }),
                witnesses,
            ))
        }
        Command::Gauge => {
            let input = load_input(cli)?;
            let ring = ArtinRing::new(
                cli.n
                    .or_else(|| input.get("N").and_then(|n| n.as_u64()).map(|n| n as usize))
                    .unwrap_or(2),
            )?;
            let g = rj::dgla_from_json(
                input
                    .get("dgla")
                    .ok_or_else(|| CoreError::Parse("gauge input needs \"dgla\"".into()))?,
                ring,
            )?;
            let x = rj::dgla_element_from_json(&g, input.get("X").unwrap_or(&Value::Null))?;
            let gamma = rj::dgla_element_from_json(&g, input.get("gamma").unwrap_or(&Value::Null))?;
            let moved = mcstack_core::dgla::gauge_act(&g, &x, &gamma)?;
            let conjugation = g.check_conjugation(&x, &gamma, &moved)?;
            let witnesses = if conjugation {
                vec![]
            } else {
                vec![Value::String("conjugation identity fails".into())]
            };
            Ok((
                json!({
                    "result": rj::dgla_element_json(&moved),
                    "conjugation_identity": conjugation,
                }),
                witnesses,
            ))
        }
        Command::Hochschild => {
            let input = load_input(cli)?;
            let a = rj::algebra_from_json(&input)?;
            let n_max = input
                .get("n_max")
                .and_then(|n| n.as_u64())
                .map(|n| n as usize)
                .or(cli.n_cap)
                .unwrap_or(3);
            let (full, normalized) = hochschild_cohomology(&a, n_max)?;
            let agree = full == normalized;
            let witnesses = if agree {
                vec![]
            } else {
                vec![Value::String(
                    "full and normalized dimensions disagree".into(),
                )]
            };
            Ok((
                json!({"full": full, "normalized": normalized, "agree": agree}),
                witnesses,
            ))
        }
        Command::Cech => {
            let input = load_input(cli)?;
            let cover = rj::space_cover_from_json(&input)?;
            let sheaf = rj::sheaf_from_json(&cover.space, input.get("sheaf_dim"))?;
            let n_max = input
                .get("n_max")
                .and_then(|n| n.as_u64())
                .map(|n| n as usize)
                .or(cli.n_cap)
                .unwrap_or(2);
            let dims = cech_cohomology(&cover, &sheaf, n_max)?;
            Ok((json!({"H": dims}), vec![]))
        }
        Command::Class => {
            let input = load_input(cli)?;
            let datum = rj::descent_datum_from_json(&input)?;
            match twisted_form_class(&datum)? {
                TwistedFormClass::Trivial { trivialization } => {
                    let mut obj = serde_json::Map::new();
                    let mut keys: Vec<_> = trivialization.into_iter().collect();
                    keys.sort_by(|a, b| a.0.cmp(&b.0));
                    for (k, v) in keys {
                        obj.insert(k, rj::relement_json(&v));
                    }
                    Ok((
                        json!({"class": "trivial", "trivialization": Value::Object(obj)}),
                        vec![],
                    ))
                }
                TwistedFormClass::Nontrivial {
                    certificate,
                    functional,
                } => Ok((
                    json!({
                        "class": "nontrivial",
                        "certificate": certificate,
                        "functional": functional,
                    }),
                    vec![],
                )),
            }
        }
        Command::Strictify => {
            let input = load_input(cli)?;
            let datum = rj::descent_datum_from_json(&input)?;
            let g = build_gmat(&datum, cli)?;
            let stack = rj::gstack_from_json(
                &g,
                input
                    .get("stack")
                    .ok_or_else(|| CoreError::Parse("strictify input needs \"stack\"".into()))?,
            )?;
            let pre = validate_gstack(&g, &stack);
            if !pre.is_empty() {
                return Ok((
                    json!({"input_valid": false}),
                    pre.into_iter().map(Value::String).collect(),
                ));
            }
            let (out, morphism, trace) = strictify(&g, &stack)?;
            let valid = validate_gstack(&g, &out);
            let morphism_ok = validate_one_morphism(&g, &stack, &out, &morphism);
            let rounds: Vec<Value> = trace
                .rounds
                .iter()
                .map(|r| {
                    json!({
                        "phase": r.phase,
                        "t_order": r.t_order,
                        "residual_support": r.residual_support,
                        "residual_max": mcstack_core::coefficients::rational_to_string(&r.residual_max),
                        "solved_support": r.solved_support,
                    })
                })
                .collect();
            let mut witnesses: Vec<Value> = valid.into_iter().map(Value::String).collect();
            witnesses.extend(morphism_ok.into_iter().map(Value::String));
            Ok((
                json!({
                    "strict": rj::gstack_json(&g, &out),
                    "morphism_j1": rj::gelt_json(&g, &morphism.j1),
                    "morphism_j2": rj::gelt_json(&g, &morphism.j2),
                    "trace": rounds,
                }),
                witnesses,
            ))
        }
        Command::Classify => {
            let input = load_input(cli)?;
            let datum = rj::descent_datum_from_json(&input)?;
            let g = build_gmat(&datum, cli)?;
            let (count, _basis) = classify_first_order(&g);
            let oracle = total_complex_h1(&datum);
            let witnesses = if count == oracle {
                vec![]
            } else {
                vec![Value::String(format!(
                    "equalizer count {count} disagrees with total-complex oracle {oracle}"
                ))]
            };
            Ok((
                json!({"classes": count, "total_complex_oracle": oracle}),
                witnesses,
            ))
        }
    }
}
