use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use splitbound::bounds::{theorem_a, BoundError, BoundInputs, BoundRegistry, TailBoundCurve};
use splitbound::chain::{
    default_grid, verify_drift, verify_minorization, ChainError, DriftCertificate, DriftReport, MinorizationReport,
    SmallSet,
};
use splitbound::constants::{certify_geometric, BlockNormSet, GeometricDrift, GeometricInputs, StartPoint};
use splitbound::estimators::{
    domination_verdict, empirical_tail, estimate_sigma2, replicate, EstimatorError, MIN_REGEN_BLOCKS,
};
use splitbound::examples::{logconcave_components, scan_xstar, Example, ExampleError, ExampleRegistry, ScanRequest};
use splitbound::splitting::{block_dependence_report, simulate_direct, simulate_ledger, write_ledger_csv, SplitError};
use splitbound::{ChainModel, State, StateSpace};

use crate::config::ExperimentConfig;

/// A command failure, carrying the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad or incomplete configuration (exit 1).
    Config(String),
    /// A check ran and failed, or there was too little data to run it (exit 2).
    Verification(String),
    /// Numerical or simulation trouble (exit 3).
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 1,
            Failure::Verification(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Verification(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<ExampleError> for Failure {
    fn from(e: ExampleError) -> Self {
        match e {
            ExampleError::Quadrature(_) | ExampleError::Chain(ChainError::QuadratureFailure(_)) => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<BoundError> for Failure {
    fn from(e: BoundError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<EstimatorError> for Failure {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::InsufficientData { .. } => Failure::Verification(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<SplitError> for Failure {
    fn from(e: SplitError) -> Self {
        match e {
            SplitError::NoRegeneration { needed, length } => Failure::Runtime(format!(
                "no regeneration covering time {needed} within {length} steps; try a longer n or a larger small set"
            )),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<ChainError> for Failure {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::QuadratureFailure(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{}: {e}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(io(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    text.push('\n');
    write(path, &text)
}

fn need<T>(v: Option<T>, what: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Config(format!("config is missing `{what}`")))
}

/// The configured example with any certificate override applied.
pub struct Prepared {
    pub example: Box<dyn Example>,
    pub model: Arc<dyn ChainModel>,
    pub cert: DriftCertificate,
    pub set: SmallSet,
    pub start: State,
}

impl Prepared {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self, Failure> {
        let example = ExampleRegistry::with_defaults().build(&cfg.model.name, &cfg.model.params)?;
        let model = example.model();
        let mut cert = example.certificate();
        let mut set = example.small_set();
        if let Some(o) = &cfg.certificate_override {
            cert.lambda = o.lambda.unwrap_or(cert.lambda);
            cert.b = o.b.unwrap_or(cert.b);
            cert.k = o.k.unwrap_or(cert.k);
            set.delta = o.delta.unwrap_or(set.delta);
        }
        cert.validate()?;
        let start = match cfg.start {
            None => example.default_start(),
            Some(x) => match model.state_space() {
                StateSpace::IntegerLattice if x.fract() == 0.0 => State::Int(x as i64),
                StateSpace::IntegerLattice => return Err(Failure::Config(format!("start {x} is not a lattice point"))),
                StateSpace::RealLine => State::Real(x),
            },
        };
        if !model.contains(start) {
            return Err(Failure::Config(format!("start {start} is outside the state space")));
        }
        Ok(Prepared { example, model, cert, set, start })
    }

    fn grid(&self) -> Vec<State> {
        match self.model.state_space() {
            StateSpace::IntegerLattice => (0..=500).map(State::Int).filter(|s| self.model.contains(*s)).collect(),
            StateSpace::RealLine => default_grid(self.model.as_ref(), &self.set.region),
        }
    }

    pub fn checks(&self) -> Result<(DriftReport, MinorizationReport), Failure> {
        let grid = self.grid();
        let drift = verify_drift(self.model.as_ref(), &self.cert, &self.set.region, &grid)?;
        let minor = verify_minorization(self.model.as_ref(), &self.set, &grid)?;
        Ok((drift, minor))
    }

    pub fn norms(&self, cfg: &ExperimentConfig) -> Result<BlockNormSet, Failure> {
        let inputs = GeometricInputs {
            drift: GeometricDrift { lambda: self.cert.lambda, b: self.cert.b, k: self.cert.k },
            delta: self.set.delta,
            pi_c: self.example.pi_c(),
            start: StartPoint { v_x: self.cert.v.eval(self.start), in_c: self.set.contains(self.start) },
            kappa: cfg.observable.kappa * self.example.kappa_scale(cfg.observable.s),
            s: cfg.observable.s,
            pi_theta: cfg.pi_theta,
        };
        certify_geometric(&inputs).map_err(|e| Failure::Config(e.to_string()))
    }
}

const SHOWN_VIOLATIONS: usize = 10;

/// Runs both checks and the constants pipeline, writes `certificate.json`,
/// and fails with exit 2 when a check does not pass.
fn certificate(cfg: &ExperimentConfig, prep: &Prepared, out: &Path) -> Result<(BlockNormSet, f64), Failure> {
    let (drift, minor) = prep.checks()?;
    let norms = prep.norms(cfg)?;
    let pi_g = prep.example.pi_g(&cfg.observable)?;
    let mut violations: Vec<_> = drift.rows.iter().filter(|r| r.scaled_violation > drift.tolerance).collect();
    violations.sort_by(|a, b| b.scaled_violation.total_cmp(&a.scaled_violation));
    violations.truncate(SHOWN_VIOLATIONS);
    let doc = json!({
        "model": prep.example.describe(),
        "drift": prep.cert,
        "small_set": { "region": prep.set.region, "m": prep.set.m, "delta": prep.set.delta },
        "start": prep.start,
        "observable": cfg.observable,
        "pi_g": pi_g,
        "drift_check": {
            "pass": drift.pass,
            "tolerance": drift.tolerance,
            "max_scaled_violation": drift.max_scaled_violation,
            "worst_state": drift.worst_state,
            "grid_points": drift.rows.len(),
            "violations": violations,
        },
        "minorization_check": minor,
        "norms": norms,
    });
    write_json(&out.join("certificate.json"), &doc)?;
    if !drift.pass {
        return Err(Failure::Verification(format!(
            "drift check FAIL: scaled violation {} at state {}",
            drift.max_scaled_violation, drift.worst_state
        )));
    }
    if !minor.pass {
        return Err(Failure::Verification(format!(
            "minorization check FAIL: slack {} at state {}",
            minor.min_slack, minor.worst_state
        )));
    }
    Ok((norms, pi_g))
}

pub fn certify(cfg: &ExperimentConfig, out: &Path) -> Result<String, Failure> {
    let prep = Prepared::new(cfg)?;
    let (norms, _) = certificate(cfg, &prep, out)?;
    Ok(format!("PASS certify {}: delta = {}, r = {}, c = {}", cfg.model.name, prep.set.delta, norms.r, norms.c))
}

pub fn simulate(cfg: &ExperimentConfig, replicas: usize, out: &Path) -> Result<String, Failure> {
    let prep = Prepared::new(cfg)?;
    let n = need(cfg.n, "n")?;
    let pi_g = prep.example.pi_g(&cfg.observable)?;
    let obs = cfg.observable;
    let f = move |x: State| obs.eval(x) - pi_g;
    let ledgers = replicate(cfg.seed, replicas, |_, rng| {
        simulate_ledger(prep.model.as_ref(), &prep.set, &f, n, prep.start, rng)
    })
    .into_iter()
    .map(|l| l.map(|mut l| {
        l.seed = Some(cfg.seed);
        l
    }))
    .collect::<Result<Vec<_>, _>>()?;

    let path = out.join("ledger.csv");
    let file = fs::File::create(&path).map_err(io(&path))?;
    write_ledger_csv(std::io::BufWriter::new(file), &ledgers)?;
    let headers: Vec<_> = ledgers.iter().map(|l| l.header()).collect();
    write_json(&out.join("ledger.json"), &headers)?;

    let blocks: usize = ledgers.iter().map(|l| l.n_blocks()).sum();
    let mut summary = json!({ "replicas": replicas, "n": n, "m": prep.set.m, "blocks": blocks, "pi_g": pi_g });
    if blocks >= MIN_REGEN_BLOCKS {
        match estimate_sigma2(&ledgers, None) {
            Ok(v) => summary["variance"] = json!(v),
            Err(e) => summary["variance_skipped"] = json!(e.to_string()),
        }
        summary["dependence"] = json!(block_dependence_report(&ledgers, cfg.seed)?);
    } else {
        summary["variance_skipped"] = json!(format!("{blocks} blocks, at least {MIN_REGEN_BLOCKS} needed"));
    }
    write_json(&out.join("summary.json"), &summary)?;
    Ok(format!("simulated {replicas} ledger(s) of n = {n} with {blocks} blocks"))
}

const DEFAULT_ETA: f64 = 0.5;

/// The bound curve named in the config, with certificate-derived parameters
/// that the config's own parameters override.
pub fn curve_for(cfg: &ExperimentConfig, norms: &BlockNormSet, n: usize) -> Result<TailBoundCurve, Failure> {
    let (family, user) = match &cfg.bound {
        Some(b) => (b.family.as_str(), b.params.clone()),
        None => ("theorem_a", BTreeMap::new()),
    };
    if family == "theorem_a" {
        let eta = user.get("eta").copied().unwrap_or(DEFAULT_ETA);
        return Ok(theorem_a(norms, n as f64, eta)?);
    }
    let sigma2 = if family == "general_markov" { norms.sigma_cap / norms.pi_theta } else { norms.sigma_cap };
    let mut inputs = BoundInputs::new(BTreeMap::new())
        .with("a", norms.a)
        .with("b", norms.b)
        .with("c", norms.c)
        .with("d", norms.d)
        .with("e", norms.e)
        .with("alpha", norms.alpha)
        .with("pi_theta", norms.pi_theta)
        .with("sigma2", sigma2)
        .with("n", n as f64)
        .with("m", 1.0)
        .with("eta", DEFAULT_ETA);
    for (k, v) in user {
        inputs = inputs.with(&k, v);
    }
    Ok(BoundRegistry::with_defaults().build(family, &inputs)?)
}

#[derive(Serialize)]
struct VerdictDoc<'a> {
    pass: bool,
    family: &'a str,
    seed: u64,
    n: usize,
    replicas: usize,
    pi_g: f64,
    worst_margin: f64,
    worst_t: f64,
    checked: usize,
    grid_points: usize,
}

pub fn verify(cfg: &ExperimentConfig, replicas: usize, out: &Path) -> Result<String, Failure> {
    let prep = Prepared::new(cfg)?;
    let n = need(cfg.n, "n")?;
    let grid = need(cfg.t_grid.as_ref(), "t_grid")?.values().map_err(Failure::Config)?;
    let (norms, pi_g) = certificate(cfg, &prep, out)?;
    let curve = curve_for(cfg, &norms, n)?;
    let obs = cfg.observable;
    let devs = replicate(cfg.seed, replicas, |_, rng| {
        let path = simulate_direct(prep.model.as_ref(), n, prep.start, rng);
        (path.iter().map(|x| obs.eval(*x)).sum::<f64>() - n as f64 * pi_g).abs()
    });
    let tail = empirical_tail(&devs, &grid)?;
    let verdict = domination_verdict(&tail, &curve);

    let mut w = csv::Writer::from_writer(Vec::new());
    let labels = curve.labels();
    let mut header = vec!["t", "empirical", "stderr", "bound_total"];
    header.extend(labels.iter().copied());
    w.write_record(&header).map_err(|e| Failure::Runtime(e.to_string()))?;
    for row in &verdict.rows {
        let mut rec = vec![row.t.to_string(), row.empirical.to_string(), row.stderr.to_string(), row.bound.to_string()];
        rec.extend(curve.term_values(row.t / curve.deviation_scale).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?;
    write(&out.join("tails.csv"), &String::from_utf8_lossy(&bytes))?;
    curve.export(out, "bounds", &grid).map_err(io(out))?;
    let doc = VerdictDoc {
        pass: verdict.pass,
        family: &verdict.family,
        seed: cfg.seed,
        n,
        replicas,
        pi_g,
        worst_margin: verdict.worst_margin,
        worst_t: verdict.worst_t,
        checked: verdict.checked,
        grid_points: grid.len(),
    };
    write_json(&out.join("verdict.json"), &doc)?;
    let line = format!(
        "{} verify {} with {}: worst margin {} at t = {} over {} checked points",
        if verdict.pass { "PASS" } else { "FAIL" },
        cfg.model.name,
        verdict.family,
        verdict.worst_margin,
        verdict.worst_t,
        verdict.checked
    );
    if verdict.pass {
        Ok(line)
    } else {
        Err(Failure::Verification(line))
    }
}

pub fn scan(cfg: &ExperimentConfig, out: &Path) -> Result<String, Failure> {
    if cfg.model.name != "logconcave" {
        return Err(Failure::Config(format!("scan needs the logconcave model, not {}", cfg.model.name)));
    }
    let sc = need(cfg.scan.as_ref(), "scan")?;
    let grid = sc.grid.values().map_err(Failure::Config)?;
    let (target, increment) = logconcave_components(&cfg.model.params)?;
    let req = ScanRequest {
        observable: cfg.observable,
        start: cfg.start.unwrap_or(0.0),
        n: sc.n,
        t: sc.t,
        eta: sc.eta,
        pi_theta: cfg.pi_theta,
    };
    let result = scan_xstar(target, increment, &grid, &req)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &result.rows {
        w.serialize(row).map_err(|e| Failure::Runtime(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?;
    write(&out.join("scan.csv"), &String::from_utf8_lossy(&bytes))?;
    write_json(&out.join("scan.json"), &result)?;
    Ok(format!("best x* = {}", result.best))
}

#[derive(serde::Deserialize)]
struct VerdictHeader {
    n: usize,
}

/// Stacks the tails of several `verify` output directories into one table.
pub fn report(cfg: &ExperimentConfig, out: &Path) -> Result<String, Failure> {
    let inputs: Vec<PathBuf> = need(cfg.report.as_ref(), "report")?.inputs.clone();
    if inputs.is_empty() {
        return Err(Failure::Config("report.inputs is empty".into()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let werr = |e: csv::Error| Failure::Runtime(e.to_string());
    w.write_record(["run", "n", "t", "empirical", "stderr", "bound"]).map_err(werr)?;
    let mut rows = 0;
    for dir in &inputs {
        let vpath = dir.join("verdict.json");
        let text = fs::read_to_string(&vpath).map_err(|e| Failure::Config(format!("{}: {e}", vpath.display())))?;
        let header: VerdictHeader =
            serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", vpath.display())))?;
        let tpath = dir.join("tails.csv");
        let mut r = csv::Reader::from_path(&tpath).map_err(|e| Failure::Config(format!("{}: {e}", tpath.display())))?;
        let run = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| dir.display().to_string());
        for rec in r.records() {
            let rec = rec.map_err(|e| Failure::Config(format!("{}: {e}", tpath.display())))?;
            let n = header.n.to_string();
            w.write_record([run.as_str(), n.as_str(), &rec[0], &rec[1], &rec[2], &rec[3]]).map_err(werr)?;
            rows += 1;
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?;
    write(&out.join("report.csv"), &String::from_utf8_lossy(&bytes))?;
    Ok(format!("report: {rows} rows from {} runs", inputs.len()))
}
