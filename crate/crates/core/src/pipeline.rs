//! The command layer: each command runs one or more stages on an input file
//! and produces a verdict with JSON, text and (for scans) CSV renderings.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, DEFAULT_GRID};
use crate::group_action::{self, build_omega, integer_kernel, DEFAULT_SCREEN_BOUND};
use crate::io::{csv_triples, InputData};
use crate::joyce::{self, DEFAULT_BOUNDARY_EPS, DEFAULT_DET_TOL};
use crate::moment::{self, MomentSpec};
use crate::quotient_geom;
use crate::toric_data::{self, ConformalData, DerivedData, Issue};
use crate::twistor_class;

/// Descent tolerance on the quaternion relations.
pub const RELATION_TOL: f64 = 1e-6;
/// Tolerance on choice independence and torus invariance of the conformal class.
pub const CLASS_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Derive,
    ScanTransversality,
    JoyceCheck,
    Descend,
    Classify,
    Deform,
    Pipeline,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Derive => "derive",
            Command::ScanTransversality => "scan-transversality",
            Command::JoyceCheck => "joyce-check",
            Command::Descend => "descend",
            Command::Classify => "classify",
            Command::Deform => "deform",
            Command::Pipeline => "pipeline",
        }
    }

    const STAGES: [Command; 7] = [
        Command::Validate,
        Command::Derive,
        Command::ScanTransversality,
        Command::JoyceCheck,
        Command::Descend,
        Command::Classify,
        Command::Deform,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub eps: Vec<f64>,
    pub bound: i64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            samples: 200,
            seed: 0,
            tol: DEFAULT_DET_TOL,
            eps: DEFAULT_BOUNDARY_EPS.to_vec(),
            bound: DEFAULT_SCREEN_BOUND,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn of(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: &'static str,
    pub status: Status,
    pub report: Value,
    pub text: Vec<String>,
    pub csv: Option<String>,
}

impl StageOutcome {
    fn failed(stage: &'static str, reason: String) -> Self {
        Self {
            stage,
            status: Status::Fail,
            text: vec![format!("not run: {reason}")],
            report: json!({ "error": reason }),
            csv: None,
        }
    }
}

/// Everything a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub command: Command,
    pub status: Status,
    pub stages: Vec<StageOutcome>,
    pub input: InputData,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }

    pub fn json(&self) -> Value {
        if let [single] = self.stages.as_slice() {
            let mut v = single.report.clone();
            if let Value::Object(m) = &mut v {
                m.insert("verdict".into(), json!(single.status));
            }
            return v;
        }
        let stages: serde_json::Map<String, Value> = self
            .stages
            .iter()
            .map(|s| (s.stage.to_string(), json!({ "verdict": s.status, "report": s.report })))
            .collect();
        json!({ "input": self.input, "stages": stages, "verdict": self.status })
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for s in &self.stages {
            out.push_str(&format!("{}: {}\n", s.stage, if s.status == Status::Pass { "PASS" } else { "FAIL" }));
            for line in &s.text {
                out.push_str(&format!("  {line}\n"));
            }
        }
        if self.stages.len() > 1 {
            out.push_str(&format!("verdict: {}\n", if self.status == Status::Pass { "PASS" } else { "FAIL" }));
        }
        out
    }

    /// CSV of the first stage that has one.
    pub fn csv(&self) -> Option<String> {
        self.stages.iter().find_map(|s| s.csv.clone())
    }
}

/// Shape errors in the input (too few vectors, zero vectors) are input errors;
/// every mathematical condition is a check.
pub fn run(command: Command, input: &InputData, opts: &Options) -> Result<Outcome> {
    let s = input.s();
    toric_data::validate_S(&s)?;
    if command != Command::Validate && command != Command::Derive && command != Command::Deform {
        input.require_r()?;
    }
    if opts.grid == 0 && matches!(command, Command::ScanTransversality | Command::JoyceCheck | Command::Pipeline) {
        return Err(Error::Input("--grid must be at least 1".into()));
    }
    let stages: Vec<Command> = if command == Command::Pipeline {
        Command::STAGES.to_vec()
    } else {
        vec![command]
    };
    let stages: Vec<StageOutcome> = stages.into_iter().map(|c| run_stage(c, input, opts)).collect::<Result<_>>()?;
    let status = Status::of(stages.iter().all(|s| s.status == Status::Pass));
    Ok(Outcome {
        command,
        status,
        stages,
        input: input.clone(),
    })
}

fn run_stage(c: Command, input: &InputData, opts: &Options) -> Result<StageOutcome> {
    match c {
        Command::Validate => validate_stage(input),
        Command::Derive => derive_stage(input, opts),
        Command::Deform => deform_stage(input),
        _ => {
            let ctx = match Numeric::prepare(input) {
                Ok(ctx) => ctx,
                Err(reason) => return Ok(StageOutcome::failed(c.name(), reason)),
            };
            let out = match c {
                Command::ScanTransversality => ctx.scan_stage(opts),
                Command::JoyceCheck => ctx.joyce_stage(opts),
                Command::Descend => ctx.descend_stage(opts),
                Command::Classify => ctx.classify_stage(input, opts),
                _ => unreachable!("handled above"),
            };
            Ok(out.unwrap_or_else(|e| StageOutcome::failed(c.name(), e.to_string())))
        }
    }
}

fn validate_stage(input: &InputData) -> Result<StageOutcome> {
    let s = input.s();
    let sv = toric_data::validate_S(&s)?;
    let convex = toric_data::is_convex(&s)?;
    let mut errors: Vec<Issue> = sv.issues.clone();
    if !convex {
        errors.push(Issue::new("convexity", None, "S is not convex"));
    }
    let rv = input.r().map(|r| toric_data::validate_R(&r));
    if let Some(rv) = &rv {
        errors.extend(rv.issues.iter().cloned());
    }
    let ok = errors.is_empty();
    let mut text = vec![
        format!("k = {}, b2 = {}", s.k(), toric_data::b2(&s)),
        format!("index of lattice spanned by S: {}", sv.index.map_or("infinite".to_string(), |i| i.to_string())),
        format!("convex: {convex}"),
    ];
    text.extend(errors.iter().map(|e| match e.index {
        Some(i) => format!("{} [{}]: {}", e.check, i, e.message),
        None => format!("{}: {}", e.check, e.message),
    }));
    Ok(StageOutcome {
        stage: "validate",
        status: Status::of(ok),
        report: json!({
            "valid": ok,
            "errors": errors,
            "sector_normalized": sv.sector_normalized,
            "consecutive_independent": sv.consecutive_independent,
            "generates_lattice": sv.generates_lattice,
            "index": sv.index,
            "convex": convex,
            "b2": toric_data::b2(&s),
            "z": rv.as_ref().map(|r| r.z.clone()),
            "zeta": rv.as_ref().map(|r| r.zeta.clone()),
        }),
        text,
        csv: None,
    })
}

fn derive_stage(input: &InputData, opts: &Options) -> Result<StageOutcome> {
    let s = input.s();
    let t = toric_data::derive_T(&s);
    let round_trip = toric_data::recover_S(&t).map(|back| back == s).unwrap_or(false);
    let omega = build_omega(&t);
    let kernel = match integer_kernel(&omega) {
        Ok(d) => d,
        Err(e) => return Ok(StageOutcome::failed("derive", e.to_string())),
    };
    let screen = group_action::locally_free_screen(&t, opts.bound);
    let quotient_is_f = group_action::quotient_is_F(&s, &kernel);
    let sum_v = t.vectors.iter().fold([0i64; 2], |acc, v| [acc[0] + v.a, acc[1] + v.b]);
    let ok = round_trip && screen.locally_free.passed() && quotient_is_f;
    let text = vec![
        format!("T = {}", t.vectors.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")),
        format!("kernel basis = {:?}", kernel.rows),
        format!("quotient is F: {quotient_is_f}"),
        format!("locally free: {}", if screen.locally_free.passed() { "PASS" } else { "FAIL" }),
    ];
    Ok(StageOutcome {
        stage: "derive",
        status: Status::of(ok),
        report: json!({
            "T": t.vectors,
            "round_trip": round_trip,
            "sum_v": sum_v,
            "omega": omega.matrix,
            "kernel_basis": kernel.rows,
            "quotient_is_F": quotient_is_f,
            "locally_free": screen.locally_free,
            "witnesses": screen.witnesses,
            "parallel_positions": screen.parallel_positions,
            "screen_bound": screen.bound,
        }),
        text,
        csv: None,
    })
}

fn deform_stage(input: &InputData) -> Result<StageOutcome> {
    let t = toric_data::derive_T(&input.s());
    match twistor_class::deformability(&t) {
        Ok(rep) => Ok(StageOutcome {
            stage: "deform",
            status: Status::Pass,
            text: vec![
                format!("T^k-invariant dimension: {}", rep.tk_invariant_dim),
                format!("extra G_S-invariant weights: {:?}", rep.extra_weights),
                format!("extra real dimension: {}", rep.extra_dim),
            ],
            report: serde_json::to_value(&rep).expect("serializable"),
            csv: None,
        }),
        Err(e) => Ok(StageOutcome::failed("deform", e.to_string())),
    }
}

/// Data shared by the numerical stages.
struct Numeric {
    t: DerivedData,
    r: ConformalData,
    spec: MomentSpec,
}

impl Numeric {
    fn prepare(input: &InputData) -> std::result::Result<Self, String> {
        let s = input.s();
        let r = input.require_r().map_err(|e| e.to_string())?;
        let sv = toric_data::validate_S(&s).map_err(|e| e.to_string())?;
        if !sv.is_valid() {
            return Err("S fails sector normalization or consecutive independence".into());
        }
        let rv = toric_data::validate_R(&r);
        if !rv.valid {
            return Err(format!(
                "conformal data invalid: {}",
                rv.issues.iter().map(|i| i.check.as_str()).collect::<Vec<_>>().join(", ")
            ));
        }
        let t = toric_data::derive_T(&s);
        let d = integer_kernel(&build_omega(&t)).map_err(|e| e.to_string())?;
        let spec = MomentSpec::new(&r, d).map_err(|e| e.to_string())?;
        Ok(Self { t, r, spec })
    }

    fn grid(&self, opts: &Options) -> GridSpec {
        GridSpec::around(&self.r, opts.grid)
    }

    fn scan_stage(&self, opts: &Options) -> Result<StageOutcome> {
        let grid = self.grid(opts);
        let scan = moment::scan_transversality(&self.t, &self.r, &self.spec, &grid, opts.tol)?;
        let holo = scan
            .points
            .iter()
            .map(|p| {
                let q = moment::orbit_point(&self.r, p.x, p.y)?;
                Ok(moment::holomorphicity_residual(&q, &self.spec) / q.norm_sqr())
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let mut report = serde_json::to_value(&scan).expect("serializable");
        report["max_relative_holomorphicity_residual"] = json!(holo);
        report["grid"] = json!(grid);
        Ok(StageOutcome {
            stage: "scan-transversality",
            status: Status::of(scan.passed),
            text: vec![
                format!("samples: {}", scan.samples),
                format!("min |normalized det|: {:e}", scan.min_abs_det),
                format!("sign changes: {}", scan.sign_changes),
                format!("bilinear-form disagreements: {}", scan.bilinear_disagreements),
            ],
            csv: Some(csv_triples("det", scan.points.iter().map(|p| (p.x, p.y, p.det)))),
            report,
        })
    }

    fn joyce_stage(&self, opts: &Options) -> Result<StageOutcome> {
        let grid = self.grid(opts);
        let ps = joyce::p_from_r(&self.r);
        let scan = joyce::nondegeneracy_scan(&self.t, &ps, &grid, &opts.eps, opts.tol)?;
        let corr = joyce::correspondence_check(&self.t, &self.r, &grid, opts.tol)?;
        let values = grid.evaluate(|c| joyce::joyce_matrix(&self.t, &ps, c.x, c.y).map(|m| m.sum_det()));
        let csv = csv_triples(
            "det",
            values
                .into_iter()
                .map(|(c, v)| v.map(|v| (c.x, c.y, v)))
                .collect::<Result<Vec<_>>>()?,
        );
        Ok(StageOutcome {
            stage: "joyce-check",
            status: Status::of(scan.passed && corr.passed),
            text: vec![
                format!("p = [{}]", ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ")),
                format!("min |det|: {:e}, sign changes: {}", scan.min_abs_det, scan.sign_changes),
                format!(
                    "correspondence: {}/{} both nonzero, {} mismatches, ratio residual {:e}",
                    corr.both_nonzero,
                    corr.samples,
                    corr.mismatches.len(),
                    corr.max_ratio_residual
                ),
            ],
            report: json!({ "p": ps, "nondegeneracy": scan, "correspondence": corr, "grid": grid }),
            csv: Some(csv),
        })
    }

    fn descend_stage(&self, opts: &Options) -> Result<StageOutcome> {
        let rep = quotient_geom::descent_report(&self.r, &self.spec, opts.samples, opts.seed)?;
        let fixed = (1..=self.r.k())
            .map(|i| quotient_geom::fixed_point_probe(&self.r, &self.spec, i, 5, opts.seed))
            .collect::<Result<Vec<_>>>()?;
        let fixed_ok = fixed.iter().all(|f| f.all_in_p && f.slot_vanishes && f.stabilizer_directions >= 1);
        let ok = rep.accepted > 0
            && rep.max_residual <= RELATION_TOL
            && rep.max_choice_residual <= CLASS_TOL
            && rep.max_invariance_residual <= CLASS_TOL
            && fixed_ok;
        Ok(StageOutcome {
            stage: "descend",
            status: Status::of(ok),
            text: vec![
                format!("accepted: {}, skipped: {}", rep.accepted, rep.skipped),
                format!("max relation residual: {:e}", rep.max_residual),
                format!("max choice residual: {:e}", rep.max_choice_residual),
                format!("max torus-invariance residual: {:e}", rep.max_invariance_residual),
                format!("fixed points q_i = 0 in P: {fixed_ok}"),
            ],
            report: json!({
                "max_residual": rep.max_residual,
                "max_choice_residual": rep.max_choice_residual,
                "max_invariance_residual": rep.max_invariance_residual,
                "accepted": rep.accepted,
                "skipped": rep.skipped,
                "samples": rep.samples,
                "fixed_points": fixed,
            }),
            csv: None,
        })
    }

    fn classify_stage(&self, input: &InputData, opts: &Options) -> Result<StageOutcome> {
        let rep = twistor_class::classification_report(&input.s(), &self.r, 1000, opts.seed)?;
        Ok(StageOutcome {
            stage: "classify",
            status: Status::of(rep.passed && rep.convex),
            text: vec![
                format!("real structure: {}", rep.checks.real_structure),
                format!("involution residual: {:e}", rep.checks.involution_residual),
                format!("product-form residual: {:e}", rep.checks.product_form_residual),
                format!("convex: {}", rep.convex),
            ]
            .into_iter()
            .chain(rep.warnings.iter().map(|w| format!("warning: {w}")))
            .collect(),
            report: serde_json::to_value(&rep).expect("serializable"),
            csv: None,
        })
    }
}
