use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::info;
use relaxforge::construct::write_cover_csv;
use relaxforge::envelope::{
    caratheodory_witness, contact_set, simplex_witness, write_envelope_csv, ConvexEnvelope, EnvelopeError,
};
use relaxforge::mesh::write_nodes_csv;
use relaxforge::relax::{minimize_relaxed, write_gap_csv, GapReport, RelaxError};
use relaxforge::{biconjugate, build_box_mesh, ConstructError, SampledLagrangian};
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("certification failed: {0}")]
    Certification(String),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Io { .. } | RunError::Input(_) => 1,
            RunError::Hypothesis(_) => 2,
            RunError::NotConverged(_) => 3,
            RunError::Certification(_) => 4,
        }
    }
}

impl From<EnvelopeError> for RunError {
    fn from(e: EnvelopeError) -> Self {
        match e {
            EnvelopeError::NoWitness { .. } | EnvelopeError::NoSimplex { .. } => RunError::Hypothesis(e.to_string()),
            _ => RunError::Input(e.to_string()),
        }
    }
}

impl From<ConstructError> for RunError {
    fn from(e: ConstructError) -> Self {
        match e {
            ConstructError::Envelope(inner) => inner.into(),
            ConstructError::Mesh(_) | ConstructError::Energy(_) | ConstructError::BadBudget(_) | ConstructError::Invalid(_) => {
                RunError::Input(e.to_string())
            }
            _ => RunError::Certification(e.to_string()),
        }
    }
}

impl From<RelaxError> for RunError {
    fn from(e: RelaxError) -> Self {
        match e {
            RelaxError::Construct(inner) => inner.into(),
            RelaxError::NotConverged { .. } => RunError::NotConverged(e.to_string()),
            RelaxError::Sandwich { .. } | RelaxError::GradientBound { .. } => RunError::Certification(e.to_string()),
            _ => RunError::Input(e.to_string()),
        }
    }
}

/// Hands `write` a buffered file and maps both I/O and CSV failures.
fn write_file<E: std::fmt::Display>(
    dir: &Path,
    name: &str,
    write: impl FnOnce(&mut BufWriter<File>) -> Result<(), E>,
) -> Result<(), RunError> {
    let path = dir.join(name);
    let io_err = |source| RunError::Io { path: path.clone(), source };
    let mut out = BufWriter::new(File::create(&path).map_err(io_err)?);
    write(&mut out).map_err(|e| io_err(io::Error::other(e.to_string())))?;
    out.flush().map_err(io_err)
}

fn prepare(cfg: &ExperimentConfig) -> Result<(SampledLagrangian, ConvexEnvelope), RunError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|source| RunError::Io { path: cfg.output_dir.clone(), source })?;
    let f = cfg.lagrangian()?;
    if f.dim() != cfg.domain.bounds.len() {
        return Err(RunError::Input(format!(
            "lagrangian is {}-dimensional, domain is {}-dimensional",
            f.dim(),
            cfg.domain.bounds.len()
        )));
    }
    let env = biconjugate(&f)?;
    let mask = contact_set(&f, &env);
    write_file(&cfg.output_dir, "envelope.csv", |w| write_envelope_csv(w, &f, &env, &mask))?;
    info!("envelope: {} samples, {} facets, {} contact nodes", f.len(), env.facets().len(), mask.count());
    Ok((f, env))
}

/// `envelope.csv` only.
pub fn envelope(cfg: &ExperimentConfig) -> Result<(), RunError> {
    prepare(cfg).map(|_| ())
}

/// Full pipeline; returns the gap report of a certified no-gap run.
pub fn run(cfg: &ExperimentConfig) -> Result<GapReport, RunError> {
    let (f, env) = prepare(cfg)?;
    let out = &cfg.output_dir;
    let mesh = Arc::new(build_box_mesh(&cfg.domain.bounds(), &cfg.domain.resolution).map_err(|e| RunError::Input(e.to_string()))?);
    let solver = cfg.solver_options()?;
    let solution = match minimize_relaxed(&mesh, &cfg.phi(), &env, &solver) {
        Ok(s) => s,
        Err(RelaxError::NotConverged { value, bound, iterations, solution }) => {
            write_file(out, "solution.csv", |w| write_nodes_csv(w, &solution.u))?;
            return Err(RunError::NotConverged(format!(
                "solver stopped at F** = {value} after {iterations} iterations; lower bound {bound}"
            )));
        }
        Err(e) => return Err(e.into()),
    };
    write_file(out, "solution.csv", |w| write_nodes_csv(w, &solution.u))?;
    info!("min F** = {} after {} iterations", solution.value, solution.iterations);

    let report = GapReport::from_solution(solution, &f, &env, &cfg.schedule(), &cfg.construct_options(), solver.tolerance)?;
    write_file(out, "gap.csv", |w| write_gap_csv(w, &report))?;
    write_file(out, "cover.csv", |w| write_cover_csv(w, &report.last.cover, Some(&report.last.ledger)))?;
    write_file(out, "summary.csv", |w| {
        writeln!(w, "min_F_relaxed,best_F,gap,certified")?;
        writeln!(
            w,
            "{},{},{},{}",
            fmt(report.min_relaxed),
            fmt(report.best_f),
            fmt(report.gap),
            report.certified()
        )
    })?;
    info!("best F = {}, gap = {}, certified = {}", report.best_f, report.gap, report.certified());
    if !report.certified() {
        let bad = report.steps.iter().find(|s| !s.certified).expect("some step is uncertified");
        return Err(RunError::Certification(format!(
            "step {} (ε = {}): F(v) = {} exceeds F**(u*) + ε",
            bad.n, bad.epsilon, bad.f_v
        )));
    }
    if !report.no_gap() {
        return Err(RunError::Certification(format!("gap {} exceeds ε_final = {}", report.gap, report.epsilon_final)));
    }
    Ok(report)
}

fn fmt(v: f64) -> String {
    relaxforge::format::fmt_f64(v)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Audit {
    pub superlinear: bool,
    pub queries: usize,
    pub contact: usize,
    pub failures: usize,
    pub simplex_radius: Option<f64>,
    pub simplex_ok: Option<bool>,
}

/// Growth bound and witness existence at every sample node of the envelope
/// domain; writes `check.csv`.
pub fn check(cfg: &ExperimentConfig) -> Result<Audit, RunError> {
    let (f, env) = prepare(cfg)?;
    let mut audit = Audit { superlinear: f.minorant().is_superlinear(), ..Default::default() };
    let mut rows = Vec::new();
    let mut radius: f64 = 0.0;
    for i in 0..f.len() {
        let x = f.node(i);
        if !env.contains(x) {
            continue;
        }
        audit.queries += 1;
        let (k, status) = match caratheodory_witness(&f, &env, x) {
            Ok(w) if w.contact => {
                audit.contact += 1;
                ("0".to_string(), "contact".to_string())
            }
            Ok(w) => {
                if w.k < f.dim() {
                    radius = radius.max(relaxforge::geometry::norm(x) + 1.0);
                }
                (w.k.to_string(), "ok".to_string())
            }
            Err(e) => {
                audit.failures += 1;
                (String::new(), e.to_string())
            }
        };
        rows.push((i, x, k, status));
    }
    if f.dim() == 2 && radius > 0.0 {
        audit.simplex_radius = Some(radius);
        audit.simplex_ok = Some(simplex_witness(&f, &env, radius).is_ok());
    }
    write_file(&cfg.output_dir, "check.csv", |w| -> csv::Result<()> {
        let mut c = csv::Writer::from_writer(w);
        let mut header = vec!["node_id", "x1"];
        if f.dim() == 2 {
            header.push("x2");
        }
        header.extend(["k", "status"]);
        c.write_record(&header)?;
        for (i, x, k, status) in &rows {
            let mut rec = vec![i.to_string(), fmt(x[0])];
            if f.dim() == 2 {
                rec.push(fmt(x[1]));
            }
            rec.extend([k.clone(), status.clone()]);
            c.write_record(&rec)?;
        }
        c.flush()?;
        Ok(())
    })?;
    if audit.failures > 0 {
        let first = rows.iter().find(|r| r.3 != "contact" && r.3 != "ok").unwrap();
        return Err(RunError::Hypothesis(format!(
            "{} of {} gradients have no witness; first: {}",
            audit.failures, audit.queries, first.3
        )));
    }
    if audit.simplex_ok == Some(false) {
        return Err(RunError::Hypothesis(format!(
            "no contact simplex encloses the ball of radius {}",
            audit.simplex_radius.unwrap()
        )));
    }
    Ok(audit)
}
