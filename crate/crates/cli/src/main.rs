//! `trc`: runs one verification command and emits its certificate.
//!
//! Exit codes: 0 when every check passes, 1 on any failed check, 2 on configuration or I/O errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use trc_core::cert::{ints_json, Certificate, Check};
use trc_core::classfield;
use trc_core::exactnum::{Poly, Rational};
use trc_core::hecke;
use trc_core::lattice;
use trc_core::lfactor::{self, CharacterValue, SatakeParams};
use trc_core::mackey::{self, PushKind};
use trc_core::norm_relation::{run_norm_relation, NormRelationConfig};
use trc_core::qcomb::{self, CoefficientTable, QCombContext};
use trc_core::TrcError;

#[derive(Parser, Debug)]
#[command(name = "trc", version, about = "Exact verification certificates for tame norm relation bookkeeping")]
#[command(arg_required_else_help = true)]
struct RunConfig {
    /// Write the JSON certificate here instead of stdout (`coeffs` also writes a sibling .csv).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for randomized property sampling; recorded in the certificate.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Apply the command's negative-control perturbation; the run must then fail.
    #[arg(long, global = true)]
    perturb: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// lambda, c, D, b, b', a coefficient tables with congruence certificates.
    Coeffs {
        #[command(flatten)]
        base: Base,
        /// Print the (r, b_r, a_r, index) table as CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Inclusion-exclusion and measure identities by sublattice enumeration.
    VerifyInclExcl {
        #[command(flatten)]
        base: Base,
        #[arg(long, default_value_t = 1)]
        depth: u32,
    },
    /// Cohomology-functor axioms on the finite group catalog, or the ordinary projector.
    MackeyTest {
        /// Catalog group name, or `all`.
        #[arg(long, default_value = "all")]
        group: String,
        /// `regular`, `cosets`, `two-orbit`, `all`, or `ord` for the ordinary projector.
        #[arg(long, default_value = "all")]
        model: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Largest precision `N` for `ord`.
        #[arg(long = "truncation", default_value_t = 8)]
        truncation: u32,
        /// Largest matrix size for `ord`.
        #[arg(long, default_value_t = 6)]
        max_dim: usize,
    },
    /// `P(chi(ell)) = L(sigma x chi, 1/2)^{-1}` for given Satake parameters.
    Lfactor {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        alpha: Alpha,
        #[arg(long, default_value_t = 1)]
        chi_order: u32,
        /// `chi(ell) = zeta_{chi_order}^{chi_power}`.
        #[arg(long, default_value_t = 1)]
        chi_power: i64,
        /// Also sweep every parameter multiset from mu_4 and mu_6 against characters of order up to chi_order.
        #[arg(long)]
        sweep: bool,
    },
    /// `Pic(O_m)` as reduced forms, with structure and characters.
    Classgroup {
        /// Discriminant; a non-fundamental value is split as `d_E f^2`.
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        #[arg(long, default_value_t = 1)]
        conductor: i64,
    },
    /// One tower step `E[ell m] / E[m]`: degree, norm map and Frobenius.
    Tower {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        #[arg(long, alias = "m", default_value_t = 1)]
        conductor: i64,
        #[arg(long)]
        ell: i64,
    },
    /// The full chain qcomb, lattice, hecke, classfield, lfactor.
    NormRelation {
        #[command(flatten)]
        base: Base,
        #[command(flatten)]
        alpha: Alpha,
        #[arg(long, allow_hyphen_values = true, default_value_t = -4)]
        disc: i64,
        #[arg(long, default_value_t = 1)]
        conductor: i64,
        /// Auxiliary prime of the tower `E[m p^r]`.
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, default_value_t = 1)]
        depth: u32,
    },
}

#[derive(Args, Debug)]
struct Base {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    ell: u64,
}

#[derive(Args, Debug)]
struct Alpha {
    /// Comma-separated Satake parameters `j/k` meaning `zeta_k^j`; defaults to all 1.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
}

impl Alpha {
    fn roots(&self, n: usize) -> Result<Vec<(i64, u32)>, TrcError> {
        let Some(text) = &self.alpha else {
            return Ok(vec![(0, 1); 2 * n]);
        };
        text.split(',')
            .map(|item| {
                let (j, k) = item.trim().split_once('/').unwrap_or((item.trim(), "1"));
                let j = j.parse::<i64>().map_err(|e| TrcError::Parse(format!("alpha {item}: {e}")))?;
                let k = k.parse::<u32>().map_err(|e| TrcError::Parse(format!("alpha {item}: {e}")))?;
                if k == 0 {
                    return Err(TrcError::Parse(format!("alpha {item}: zero order")));
                }
                Ok((j, k))
            })
            .collect()
    }
}

/// A certificate plus the optional CSV table.
struct Emission {
    cert: Certificate,
    csv: Option<String>,
}

fn coeffs(base: &Base, perturb: bool) -> Result<Emission, TrcError> {
    let ctx = QCombContext::new(base.n, base.ell)?;
    let table = CoefficientTable::compute(&ctx);
    let mut b = table.bcoef.b.clone();
    if perturb {
        b[1] += Rational::from_integer(1.into());
    }
    let phi = hecke::phi_certificate(&ctx, Some(&b))?;
    let a = hecke::a_coefficients_with(&ctx, &b)?;
    let mut cert = Certificate::new("coeffs", json!({ "n": base.n, "ell": base.ell, "perturb_b1": perturb }), None);
    cert.push(Check::from_bool("congruences-mod-ell-1", table.congruences.pass(), Value::Null));
    cert.push(Check::from_bool("lambda=closed-form", table.lambda == qcomb::lambda_closed_form(&ctx), Value::Null));
    cert.absorb("phi", &phi);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| TrcError::Parse(format!("csv: {e}"));
    w.write_record(["r", "b_r", "a_r", "index"]).map_err(io)?;
    for (r, rep) in a.reports.iter().enumerate() {
        w.write_record([r.to_string(), b[r].to_string(), a.a[r].to_string(), rep.index_k_v1r.to_string()]).map_err(io)?;
    }
    let csv = String::from_utf8(w.into_inner().map_err(|e| TrcError::Parse(format!("csv: {e}")))?)
        .map_err(|e| TrcError::Parse(e.to_string()))?;
    cert.data = json!({ "table": table.to_json(), "phi": phi.data });
    Ok(Emission { cert, csv: Some(csv) })
}

fn verify_incl_excl(base: &Base, depth: u32, perturb: bool) -> Result<Emission, TrcError> {
    let mut lambda = qcomb::lambda_coefficients(&QCombContext::new(base.n, base.ell)?);
    let ie = lattice::verify_inclusion_exclusion(base.n, base.ell, depth)?;
    if perturb {
        lambda[0] += 1;
    }
    let me = lattice::verify_measure_identity_with(base.n, base.ell, depth, &lambda)?;
    let mut cert = Certificate::new(
        "verify-incl-excl",
        json!({ "n": base.n, "ell": base.ell, "depth": depth, "perturb_lambda1": perturb }),
        None,
    );
    for lc in [&ie, &me] {
        cert.push(Check::from_bool(
            lc.identity.clone(),
            lc.pass,
            json!({ "cases": lc.cases_checked, "first_failure": lc.first_failure }),
        ));
    }
    cert.data = json!({ "lambda": ints_json(&lambda) });
    Ok(Emission { cert, csv: None })
}

fn mackey_test(group: &str, model: &str, samples: usize, truncation: u32, max_dim: usize, seed: u64, perturb: bool) -> Result<Emission, TrcError> {
    if model == "ord" {
        if perturb {
            return Err(TrcError::Incompatible("the ord model has no perturbation; use a functor model".into()));
        }
        return Ok(Emission { cert: mackey::ord_report(samples, max_dim, truncation, seed)?, csv: None });
    }
    let push = if perturb { PushKind::IndexScaled } else { PushKind::Trace };
    let groups = if group == "all" {
        mackey::catalog()
    } else {
        vec![mackey::catalog_group(group)?]
    };
    let models: Vec<&str> = if model == "all" { mackey::MODELS.to_vec() } else { vec![model] };
    let mut cert = Certificate::new(
        "mackey-test",
        json!({ "group": group, "model": model, "samples": samples, "pushforward": format!("{push:?}") }),
        None,
    );
    for entry in &groups {
        for m in &models {
            for c in mackey::mackey_report_with(entry, m, samples, seed, push)?.checks {
                cert.push(c);
            }
        }
    }
    cert.data = json!({ "limitations": [mackey::LIMITATION] });
    Ok(Emission { cert, csv: None })
}

fn lfactor_cmd(base: &Base, alpha: &Alpha, chi_order: u32, chi_power: i64, sweep: bool, perturb: bool) -> Result<Emission, TrcError> {
    let roots = alpha.roots(base.n)?;
    let sp = SatakeParams::from_roots(base.n, base.ell, &roots)?;
    let chi = CharacterValue::new(base.ell, chi_order, chi_power)?;
    let fp = if perturb {
        // P built from -alpha_1 but compared against the unperturbed L-value
        let mut bad = roots.clone();
        bad[0] = (2 * bad[0].0 + i64::from(bad[0].1), 2 * bad[0].1);
        lfactor::frob_poly_from_satake(&SatakeParams::from_roots(base.n, base.ell, &bad)?)
    } else {
        lfactor::frob_poly_from_satake(&sp)
    };
    let mut cert = Certificate::new(
        "lfactor",
        json!({
            "n": base.n, "ell": base.ell,
            "alpha": roots.iter().map(|(j, k)| format!("{j}/{k}")).collect::<Vec<_>>(),
            "chi_order": chi_order, "chi_power": chi_power, "perturb_alpha1": perturb,
        }),
        None,
    );
    cert.absorb("central-value", &lfactor::central_value_certificate(&sp, &fp, &chi));
    if sweep {
        let s = lfactor::central_value_sweep(base.n, base.ell, chi_order)?;
        cert.push(Check::from_bool("sweep", s.failures.is_empty(), json!({ "cases": s.cases, "failures": s.failures })));
    }
    cert.data = json!({
        "P": coeff_strings(&fp.p),
        "P_lambda": coeff_strings(&fp.p_lambda),
        "tame_factor": lfactor::tame_factor(&sp, &chi).to_string(),
    });
    Ok(Emission { cert, csv: None })
}

/// Coefficients of `X^0, X^1, ...` as exact strings.
fn coeff_strings(p: &Poly) -> Vec<String> {
    p.coeffs().iter().map(ToString::to_string).collect()
}

fn classgroup(disc: i64, conductor: i64, perturb: bool) -> Result<Emission, TrcError> {
    let (d_e, f) = classfield::split_discriminant(disc)?;
    let m = f.checked_mul(conductor).ok_or_else(|| TrcError::BoundExceeded("conductor overflows".into()))?;
    let cl = classfield::ring_class_group(d_e, m)?;
    let mut cert = Certificate::new("classgroup", json!({ "disc": disc, "conductor": conductor, "perturb_character": perturb }), None);
    cert.absorb("group", &classfield::group_certificate(&cl));
    let mut chars = cl.group.characters();
    if perturb {
        // chi(1) = -1 is not a homomorphism
        let c = &mut chars[0];
        let k = c.exponent.max(2);
        c.values = c.values.iter().map(|&v| v * (k / c.exponent)).collect();
        c.exponent = k;
        c.values[cl.identity()] = k / 2;
    }
    cert.absorb("characters", &classfield::character_certificate(&cl, &chars));
    cert.data = json!({
        "D": cl.d,
        "d_E": d_e,
        "m": m,
        "h": cl.order(),
        "forms": cl.forms.iter().map(|f| f.label()).collect::<Vec<_>>(),
        "structure": cl.structure(),
        "characters": chars.iter().map(|c| json!({ "exponent": c.exponent, "values": c.values })).collect::<Vec<_>>(),
    });
    Ok(Emission { cert, csv: None })
}

fn tower_cmd(disc: i64, conductor: i64, ell: i64, perturb: bool) -> Result<Emission, TrcError> {
    let (d_e, f) = classfield::split_discriminant(disc)?;
    let (step, cert) = classfield::tower_with(d_e, f * conductor, ell, perturb)?;
    let mut cert = cert;
    cert.data = json!({ "step": step, "details": cert.data });
    Ok(Emission { cert, csv: None })
}

fn run(cfg: &RunConfig) -> Result<Emission, TrcError> {
    let mut out = match &cfg.command {
        Command::Coeffs { base, .. } => coeffs(base, cfg.perturb),
        Command::VerifyInclExcl { base, depth } => verify_incl_excl(base, *depth, cfg.perturb),
        Command::MackeyTest { group, model, samples, truncation, max_dim } => {
            mackey_test(group, model, *samples, *truncation, *max_dim, cfg.seed, cfg.perturb)
        }
        Command::Lfactor { base, alpha, chi_order, chi_power, sweep } => {
            lfactor_cmd(base, alpha, *chi_order, *chi_power, *sweep, cfg.perturb)
        }
        Command::Classgroup { disc, conductor } => classgroup(*disc, *conductor, cfg.perturb),
        Command::Tower { disc, conductor, ell } => tower_cmd(*disc, *conductor, *ell, cfg.perturb),
        Command::NormRelation { base, alpha, disc, conductor, p, r, depth } => {
            let nr = NormRelationConfig {
                n: base.n,
                ell: base.ell,
                d_e: *disc,
                m: *conductor,
                p: *p,
                r: *r,
                alpha: alpha.roots(base.n)?,
                depth: *depth,
                perturb_b1: cfg.perturb,
            };
            run_norm_relation(&nr).map(|cert| Emission { cert, csv: None })
        }
    }?;
    out.cert.seed = Some(cfg.seed);
    Ok(out)
}

fn emit(cfg: &RunConfig, out: &Emission) -> std::io::Result<()> {
    let text = out.cert.to_json_string() + "\n";
    let csv_only = matches!(cfg.command, Command::Coeffs { csv: true, .. });
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, &text)?;
            if let Some(csv) = &out.csv {
                std::fs::write(path.with_extension("csv"), csv)?;
            }
        }
        None if csv_only => print!("{}", out.csv.as_deref().unwrap_or_default()),
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    let out = match run(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&cfg, &out) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    if out.cert.pass {
        ExitCode::SUCCESS
    } else {
        if let Some(f) = &out.cert.first_failure {
            eprintln!("FAIL: {f}");
        }
        ExitCode::from(1)
    }
}
