//! Argument parsing and subcommand execution.

use std::collections::BTreeSet;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nicolai_core::charges::{
    conservation_check, enumerate_hat_xi, ConservationReport, ConservedSequence, Support,
};
use nicolai_core::dynamics::{diagonalize, MAX_DENSE_DIM};
use nicolai_core::groundstates::{enumerate_ground_configs, MAX_EXHAUSTIVE_SITES};
use nicolai_core::transfer::{count_ground_configs, count_hat_xi, count_ring, entropy_density, leading_eigenvalue};
use nicolai_core::{Lattice, Model, ModelSpec, Variant};
use serde_json::{json, Value};

use crate::formats::{
    clean_zero, num, reference_tables, sequence_to_json, spec_from_json, spec_to_json, spectrum_csv, with_schema,
    write_atomic,
};
use crate::suite::{conservation_sweep, conserved_candidates, ergodicity, ergodicity_check, full_suite, model_checks};
use crate::{AppError, Check};

/// Largest lattice on which `--verify-susy` builds the full model.
const MAX_SUSY_SITES: usize = 16;

#[derive(Parser, Debug)]
#[command(name = "nicolai", version, about = "Exact diagonalization and charge enumeration for the Nicolai model")]
pub struct Cli {
    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug, Clone, Default)]
pub struct LatticeArgs {
    /// Periodic ring on sites [-m-1, m]; requires --m.
    #[arg(long)]
    pub ring: bool,
    #[arg(long, value_name = "M")]
    pub m: Option<i64>,
    /// Open chain of N sites (odd N), sites 0..N-1.
    #[arg(long, value_name = "N")]
    pub chain: Option<i64>,
    /// Periodic torus, e.g. 4x4.
    #[arg(long, value_name = "LxW")]
    pub torus: Option<String>,
    /// Model spec JSON file.
    #[arg(long, value_name = "FILE")]
    pub spec: Option<PathBuf>,
}

impl LatticeArgs {
    /// The requested model, or `None` when no lattice flag was given.
    pub fn resolve(&self) -> Result<Option<ModelSpec>, AppError> {
        let chosen = usize::from(self.ring) + usize::from(self.chain.is_some())
            + usize::from(self.torus.is_some()) + usize::from(self.spec.is_some());
        if chosen > 1 {
            return Err(AppError::Config("choose one of --ring, --chain, --torus, --spec".into()));
        }
        if self.m.is_some() && !self.ring {
            return Err(AppError::Config("--m only applies to --ring".into()));
        }
        if self.ring {
            let m = self.m.ok_or_else(|| AppError::Config("--ring requires --m".into()))?;
            return Ok(Some(ModelSpec::ring(m)?));
        }
        if let Some(n) = self.chain {
            if n < 3 {
                return Err(AppError::Config(format!("--chain needs at least 3 sites, got {n}")));
            }
            return Ok(Some(ModelSpec::chain(0, n - 1)?));
        }
        if let Some(t) = &self.torus {
            let (a, b) = t
                .split_once(['x', 'X'])
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| AppError::Config(format!("--torus expects LxW, got {t:?}")))?;
            return Ok(Some(ModelSpec::torus(a, b)?));
        }
        if let Some(path) = &self.spec {
            let text = std::fs::read_to_string(path).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
            return Ok(Some(spec_from_json(&text)?));
        }
        Ok(None)
    }

    fn require(&self) -> Result<ModelSpec, AppError> {
        self.resolve()?.ok_or_else(|| AppError::Config("a lattice is required (--ring --m M, --chain N, --torus LxW or --spec FILE)".into()))
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the model and summarize it.
    Build {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Check the algebraic identities.
        #[arg(long)]
        verify: bool,
        /// Diagonalize and emit the spectrum.
        #[arg(long)]
        spectrum: bool,
    },
    /// Enumerate sequences of conservation and check their operators.
    Charges {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Sequences on [2K, 2L] with constant edge pairs.
        #[arg(long, num_args = 2, value_names = ["K", "L"], allow_negative_numbers = true)]
        interval: Option<Vec<i64>>,
        /// Measure [H, Q(f)] for every sequence.
        #[arg(long)]
        check: bool,
        /// Compare the shipped tables on [0,2], [0,4], [0,6] with the enumeration.
        #[arg(long)]
        reference_tables: bool,
    },
    /// Classical ground-state census.
    Groundstates {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Count with the transfer matrix and report the entropy density.
        #[arg(long)]
        transfer_matrix: bool,
        /// Check the kernel conditions on every configuration.
        #[arg(long)]
        verify_susy: bool,
    },
    /// Mazur gaps of the conserved charges.
    Ergodicity {
        #[command(flatten)]
        lattice: LatticeArgs,
        /// Inverse temperatures (repeatable).
        #[arg(long, value_name = "BETA", num_args = 1.., default_values_t = [0.5, 1.0, 2.0])]
        beta: Vec<f64>,
    },
    /// Run every applicable check.
    Verify {
        #[command(flatten)]
        lattice: LatticeArgs,
    },
}

/// Rendered result of a subcommand.
#[derive(Debug)]
pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub csv: Option<String>,
    pub passed: bool,
}

impl Outcome {
    fn render(&self, format: Format) -> Result<String, AppError> {
        Ok(match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&with_schema(self.json.clone()))
                    .map_err(|e| AppError::Io(e.to_string()))?;
                s.push('\n');
                s
            }
            Format::Text => self.text.clone(),
            Format::Csv => self
                .csv
                .clone()
                .ok_or_else(|| AppError::Config("this command has no CSV output".into()))?,
        })
    }
}

fn checks_json(checks: &[Check]) -> Value {
    Value::Array(
        checks
            .iter()
            .map(|c| json!({"name": c.name, "passed": c.passed, "detail": c.detail}))
            .collect(),
    )
}

fn checks_text(checks: &[Check]) -> String {
    checks
        .iter()
        .map(|c| format!("{} {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name))
        .collect()
}

fn model_summary(model: &Model) -> Value {
    json!({
        "spec": spec_to_json(&model.spec),
        "lattice": model.lattice().describe(),
        "sites": model.lattice().len(),
        "dimension": model.basis.len(),
        "supercharge_terms": model.supercharge.len(),
        "q_nonzeros": model.q.nnz(),
        "h_nonzeros": model.h.nnz(),
    })
}

fn cmd_build(lattice: &LatticeArgs, verify: bool, spectrum: bool, seed: u64) -> Result<Outcome, AppError> {
    let model = Model::build(&lattice.require()?)?;
    let mut json = model_summary(&model);
    let mut text = format!(
        "{}: {} sites, dimension {}, {} supercharge terms\n",
        model.lattice().describe(),
        model.lattice().len(),
        model.basis.len(),
        model.supercharge.len()
    );
    let mut passed = true;
    if verify {
        let checks = model_checks(&model, seed)?;
        passed = checks.iter().all(|c| c.passed);
        json["checks"] = checks_json(&checks);
        text.push_str(&checks_text(&checks));
    }
    let mut csv = None;
    if spectrum {
        if model.basis.len() > MAX_DENSE_DIM {
            return Err(AppError::Config(format!("dimension {} is too large for a dense spectrum", model.basis.len())));
        }
        let s = diagonalize(&model.h)?;
        let rows: Vec<Value> = s
            .sector_table()
            .into_iter()
            .map(|(sector, e, m)| json!({"sector": sector, "eigenvalue": num(clean_zero(e)), "multiplicity": m}))
            .collect();
        json["spectrum"] = Value::Array(rows);
        json["min_eigenvalue"] = num(clean_zero(s.min_eigenvalue()));
        let table = spectrum_csv(&s);
        text.push_str(&table);
        csv = Some(table);
    }
    Ok(Outcome { json, text, csv, passed })
}

fn sequence_row(i: usize, f: &ConservedSequence, report: Option<&ConservationReport>) -> Value {
    let mut row = json!({
        "index": i,
        "support": f.support().to_string(),
        "signs": f.signs_string(),
        "operator": operator_string(f),
        "sequence": sequence_to_json(f),
    });
    if let Some(r) = report {
        row["commutator_max"] = json!(r.commutator);
        row["commutator_adjoint_max"] = json!(r.commutator_adjoint);
        row["square_max"] = json!(r.square);
        row["local_products_vanish"] = json!(r.local_products_vanish);
    }
    row
}

fn operator_string(f: &ConservedSequence) -> String {
    f.to_operator().factors.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn rows_csv(seqs: &[ConservedSequence], reports: Option<&[ConservationReport]>) -> String {
    let mut out = String::from(if reports.is_some() { "index,support,signs,commutator_max\n" } else { "index,support,signs\n" });
    for (i, f) in seqs.iter().enumerate() {
        match reports {
            Some(r) => out.push_str(&format!("{i},{},{},{}\n", f.support(), f.signs_string(), r[i].commutator)),
            None => out.push_str(&format!("{i},{},{}\n", f.support(), f.signs_string())),
        }
    }
    out
}

fn cmd_reference_tables() -> Result<Outcome, AppError> {
    let mut tables = Vec::new();
    let mut text = String::new();
    let mut csv = String::from("table,name,signs,enumerated\n");
    let mut passed = true;
    for t in reference_tables() {
        let enumerated = enumerate_hat_xi(t.k, t.l)?;
        let set: BTreeSet<String> = enumerated.iter().map(|f| f.signs_string()).collect();
        let listed: BTreeSet<String> = t.rows.iter().map(|r| r.sequence.signs_string()).collect();
        let matches = set == listed && t.rows.len() == enumerated.len();
        passed &= matches;
        text.push_str(&format!("Xi_hat({},{}) on [{}, {}]: {} rows\n", t.k, t.l, 2 * t.k, 2 * t.l, t.rows.len()));
        let mut rows = Vec::new();
        for r in &t.rows {
            let found = set.contains(&r.sequence.signs_string());
            let values: Vec<String> = r.sequence.values().iter().map(|v| format!("{:+}", v.value())).collect();
            text.push_str(&format!("  {:<9} {}\n", r.name, values.join(" ")));
            csv.push_str(&format!("{}_{},{},{},{found}\n", t.k, t.l, r.name, r.sequence.signs_string()));
            rows.push(json!({"name": r.name, "signs": r.sequence.signs_string(), "enumerated": found, "operator": operator_string(&r.sequence)}));
        }
        tables.push(json!({
            "k": t.k, "l": t.l, "rows": rows,
            "enumerated_count": enumerated.len(),
            "transfer_count": count_hat_xi(t.k, t.l)? as u64,
            "matches": matches,
        }));
    }
    Ok(Outcome { json: json!({"tables": tables, "all_match": passed}), text, csv: Some(csv), passed })
}

fn cmd_charges(
    lattice: &LatticeArgs,
    interval: Option<&[i64]>,
    check: bool,
    tables: bool,
) -> Result<Outcome, AppError> {
    if tables {
        return cmd_reference_tables();
    }
    let spec = lattice.resolve()?;
    let (seqs, model_spec, counts) = match (interval, spec) {
        (Some(&[k, l]), spec) => {
            let seqs = enumerate_hat_xi(k, l)?;
            let counts = json!({"enumerated": seqs.len(), "transfer": count_hat_xi(k, l)? as u64});
            let spec = match spec {
                Some(s) => s,
                None => ModelSpec::chain(2 * k, 2 * l)?,
            };
            (seqs, spec, counts)
        }
        (Some(_), _) => return Err(AppError::Config("--interval takes K and L".into())),
        (None, Some(spec)) => {
            let model = Model::build(&spec)?;
            let seqs = conserved_candidates(&model)?;
            let mut counts = json!({"sequences": seqs.len()});
            if spec.lattice().is_periodic() && spec.variant() == Variant::Nicolai1d {
                counts["full_ring_transfer"] = json!(count_ring(spec.lattice().len())? as u64);
                counts["full_ring"] = json!(seqs.iter().filter(|f| matches!(f.support(), Support::Ring { .. })).count());
            }
            (seqs, spec, counts)
        }
        (None, None) => return Err(AppError::Config("give --interval K L, a lattice, or --reference-tables".into())),
    };
    let reports = if check {
        let model = Model::build(&model_spec)?;
        Some(if interval.is_some() && model.basis.len() <= 64 {
            seqs.iter().map(|f| conservation_check(&model, f)).collect::<Result<Vec<_>, _>>()?
        } else {
            conservation_sweep(&model, &seqs)?
        })
    } else {
        None
    };
    let passed = reports
        .as_ref()
        .is_none_or(|r| r.iter().all(|r| r.is_conserved() && r.square == 0 && r.local_products_vanish));
    let rows: Vec<Value> = seqs.iter().enumerate().map(|(i, f)| sequence_row(i, f, reports.as_ref().map(|r| &r[i]))).collect();
    let mut text = format!("{} sequences\n", seqs.len());
    for (i, f) in seqs.iter().enumerate() {
        text.push_str(&format!("{i:>5} {f}"));
        if let Some(r) = &reports {
            text.push_str(&format!("  [H,Q(f)] max {}", r[i].commutator));
        }
        text.push('\n');
    }
    let csv = rows_csv(&seqs, reports.as_deref());
    let json = json!({
        "spec": spec_to_json(&model_spec),
        "counts": counts,
        "checked": check,
        "all_conserved": reports.as_ref().map(|_| passed),
        "sequences": rows,
    });
    Ok(Outcome { json, text, csv: Some(csv), passed })
}

fn cmd_groundstates(lattice: &LatticeArgs, transfer: bool, verify_susy: bool) -> Result<Outcome, AppError> {
    let spec = lattice.require()?;
    let lat: Lattice = *spec.lattice();
    let exhaustive = lat.len() <= MAX_EXHAUSTIVE_SITES;
    if !exhaustive && !transfer {
        return Err(AppError::Config(format!(
            "{} sites exceed the exhaustive limit {MAX_EXHAUSTIVE_SITES}; use --transfer-matrix",
            lat.len()
        )));
    }
    let configs = if exhaustive { Some(enumerate_ground_configs(&lat)?) } else { None };
    let mut passed = true;
    let mut json = json!({
        "sites": lat.len(),
        "boundary": if lat.is_periodic() { "periodic" } else { "open" },
        "lattice": lat.describe(),
    });
    if let Some(c) = &configs {
        json["count"] = json!(c.len());
    }
    if transfer {
        let t = count_ground_configs(&lat)?;
        json["transfer_count"] = json!(t as u64);
        json["leading_eigenvalue"] = num(leading_eigenvalue());
        json["entropy_density"] = num(entropy_density());
        if let Some(c) = &configs {
            let agree = c.len() as u128 == t;
            json["transfer_matches_exhaustive"] = json!(agree);
            passed &= agree;
        } else {
            json["count"] = json!(t as u64);
        }
    } else if spec.variant() == Variant::Nicolai1d {
        json["entropy_density"] = num(entropy_density());
    }
    let mut text = String::new();
    if verify_susy {
        if lat.len() > MAX_SUSY_SITES {
            return Err(AppError::Config(format!("--verify-susy is limited to {MAX_SUSY_SITES} sites")));
        }
        let model = Model::build(&spec)?;
        let checks = crate::suite::ground_checks(&model)?;
        passed &= checks.iter().all(|c| c.passed);
        json["checks"] = checks_json(&checks);
        text.push_str(&checks_text(&checks));
    }
    let mut csv = String::from("bitstring\n");
    if let Some(c) = &configs {
        json["configurations"] = Value::Array(c.iter().map(|g| json!(g.bitstring())).collect());
        for g in c {
            text.push_str(&g.bitstring());
            text.push('\n');
            csv.push_str(&g.bitstring());
            csv.push('\n');
        }
    }
    Ok(Outcome { json, text, csv: Some(csv), passed })
}

fn cmd_ergodicity(lattice: &LatticeArgs, betas: &[f64]) -> Result<Outcome, AppError> {
    if betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
        return Err(AppError::Config("--beta values must be finite and non-negative".into()));
    }
    let spec = lattice.require()?;
    let model = Model::build(&spec)?;
    let report = ergodicity(&model, betas)?;
    let check = ergodicity_check(&report);
    let entries: Vec<Value> = report
        .entries
        .iter()
        .map(|e| {
            json!({
                "generator": e.label,
                "trace_gap": num(e.trace_gap),
                "second_moment": num(e.second_moment),
                "gibbs": e.gibbs_gaps.iter().map(|&(b, g)| json!({"beta": num(b), "gap": num(g)})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut text = format!(
        "{} generators, invariant rank {}, min gap {:.6e}, verdict {}\n",
        report.entries.len(),
        report.invariant_rank,
        report.min_gap(),
        if report.non_ergodic() { "non-ergodic" } else { "inconclusive" }
    );
    let mut csv = String::from("generator,state,beta,gap\n");
    for e in &report.entries {
        text.push_str(&format!("{:<28} trace {:.6e}", e.label, e.trace_gap));
        csv.push_str(&format!("{},trace,0,{}\n", e.label, crate::formats::sig15(e.trace_gap)));
        for &(b, g) in &e.gibbs_gaps {
            text.push_str(&format!("  beta={b} {g:.6e}"));
            csv.push_str(&format!("{},gibbs,{b},{}\n", e.label, crate::formats::sig15(g)));
        }
        text.push('\n');
    }
    let json = json!({
        "spec": spec_to_json(&spec),
        "betas": betas.iter().map(|&b| num(b)).collect::<Vec<_>>(),
        "generators": entries,
        "invariant_rank": report.invariant_rank,
        "ground_witness_gap": report.ground_witness.map(num),
        "min_gap": num(report.min_gap()),
        "non_ergodic": report.non_ergodic(),
        "check": {"name": check.name, "passed": check.passed, "detail": check.detail},
    });
    Ok(Outcome { json, text, csv: Some(csv), passed: check.passed })
}

fn cmd_verify(lattice: &LatticeArgs, seed: u64) -> Result<Outcome, AppError> {
    let spec = lattice.require()?;
    let model = Model::build(&spec)?;
    let checks = full_suite(&model, seed)?;
    let failures = checks.iter().filter(|c| !c.passed).count();
    let mut text = checks_text(&checks);
    text.push_str(&format!("{} checks, {failures} failures\n", checks.len()));
    let mut csv = String::from("check,passed\n");
    for c in &checks {
        csv.push_str(&format!("{},{}\n", c.name, c.passed));
    }
    let json = json!({
        "summary": model_summary(&model),
        "checks": checks_json(&checks),
        "failures": failures,
    });
    Ok(Outcome { json, text, csv: Some(csv), passed: failures == 0 })
}

pub fn execute(cli: &Cli) -> Result<Outcome, AppError> {
    match &cli.command {
        Command::Build { lattice, verify, spectrum } => cmd_build(lattice, *verify, *spectrum, cli.seed),
        Command::Charges { lattice, interval, check, reference_tables } => {
            cmd_charges(lattice, interval.as_deref(), *check, *reference_tables)
        }
        Command::Groundstates { lattice, transfer_matrix, verify_susy } => {
            cmd_groundstates(lattice, *transfer_matrix, *verify_susy)
        }
        Command::Ergodicity { lattice, beta } => cmd_ergodicity(lattice, beta),
        Command::Verify { lattice } => cmd_verify(lattice, cli.seed),
    }
}

/// Runs the parsed command, writes its output and returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = execute(cli).and_then(|outcome| {
        let rendered = outcome.render(cli.format)?;
        match &cli.output {
            Some(path) => write_atomic(path, &rendered)?,
            None => print!("{rendered}"),
        }
        Ok(outcome.passed)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 3,
        Err(e) => {
            eprintln!("nicolai: {e}");
            e.exit_code()
        }
    }
}
