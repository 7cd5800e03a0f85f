//! Family sweeps: sample states, compute (τ, σ, M_M, M_S), place them against
//! the bounds, and read/write the resulting records.
//!
//! CSV columns, in order:
//! `state_id,family,p1,p2,p3,p4,p5,p6,tau,sigma,m_mermin,m_svet,tau_ok_mermin,sigma_ok_mermin,tau_ok_svet,sigma_ok_svet`.
//! For `canonical5`, p1..p6 are μ₀..μ₄, φ; for `spinor3`, p1..p3 are θ₁..θ₃ and
//! p4..p6 are empty.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bell::{maximize, BellMode, OptimizerOptions};
use crate::bounds::{check_record, mermin_bounds, svetlichny_bounds, BoundCheck, DEFAULT_SLACK};
use crate::error::{Error, Result};
use crate::measures::{measures_from_canonical, measures_from_state};
use crate::states::{
    canonical_to_state, sample_canonical, sample_three_spinor, three_spinor_to_state, CanonicalParams, PureState3Q,
    ThreeSpinorParams,
};

pub const CSV_HEADER: [&str; 16] = [
    "state_id",
    "family",
    "p1",
    "p2",
    "p3",
    "p4",
    "p5",
    "p6",
    "tau",
    "sigma",
    "m_mermin",
    "m_svet",
    "tau_ok_mermin",
    "sigma_ok_mermin",
    "tau_ok_svet",
    "sigma_ok_svet",
];

/// Restart multiplier applied when a record looks like an optimizer shortfall.
pub const ESCALATION_FACTOR: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Canonical5,
    Spinor3,
}

impl Family {
    /// Whether the bounds are claimed for τ on this family (σ is always claimed).
    pub fn tau_bounded(self) -> bool {
        matches!(self, Family::Spinor3)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Canonical5 => "canonical5",
            Family::Spinor3 => "spinor3",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical5" => Ok(Family::Canonical5),
            "spinor3" => Ok(Family::Spinor3),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyParams {
    Canonical(CanonicalParams),
    Spinor(ThreeSpinorParams),
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Canonical(_) => Family::Canonical5,
            FamilyParams::Spinor(_) => Family::Spinor3,
        }
    }

    pub fn columns(&self) -> [Option<f64>; 6] {
        match self {
            FamilyParams::Canonical(p) => {
                let [a, b, c, d, e] = p.mu;
                [Some(a), Some(b), Some(c), Some(d), Some(e), Some(p.phi)]
            }
            FamilyParams::Spinor(p) => [Some(p.theta1), Some(p.theta2), Some(p.theta3), None, None, None],
        }
    }

    pub fn state(&self) -> Result<PureState3Q> {
        match self {
            FamilyParams::Canonical(p) => canonical_to_state(p),
            FamilyParams::Spinor(p) => three_spinor_to_state(p),
        }
    }
}

/// One scatter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub state_id: usize,
    pub params: FamilyParams,
    pub tau: f64,
    pub sigma: f64,
    pub m_mermin: f64,
    pub m_svet: f64,
    pub check: BoundCheck,
    /// Whether the record was re-run with more restarts.
    pub escalated: bool,
}

impl SweepRecord {
    pub fn family(&self) -> Family {
        self.params.family()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub family: Family,
    pub n_samples: usize,
    pub seed: u64,
    pub optimizer: OptimizerOptions,
    pub slack: f64,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
}

impl SweepConfig {
    pub fn new(family: Family, n_samples: usize, seed: u64) -> Self {
        Self { family, n_samples, seed, optimizer: OptimizerOptions::default(), slack: DEFAULT_SLACK, jobs: None }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Optimizer seed for record `state_id` of a sweep seeded with `seed`.
pub fn record_seed(seed: u64, state_id: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ state_id as u64)
}

pub fn sample_params(family: Family, seed: u64, n: usize) -> Vec<FamilyParams> {
    match family {
        Family::Canonical5 => sample_canonical(seed, n).into_iter().map(FamilyParams::Canonical).collect(),
        Family::Spinor3 => sample_three_spinor(seed, n).into_iter().map(FamilyParams::Spinor).collect(),
    }
}

/// Measures, both maximal violations and the bound placement for one state.
///
/// A record whose failures could be explained by the optimizer undershooting
/// M is recomputed once with [`ESCALATION_FACTOR`]× restarts from the same
/// seed (so the original starts are included) before it is reported.
pub fn evaluate(state_id: usize, params: FamilyParams, opts: &OptimizerOptions, slack: f64) -> Result<SweepRecord> {
    let state = params.state()?;
    let measures = match params {
        FamilyParams::Canonical(p) => measures_from_canonical(&p)?,
        FamilyParams::Spinor(_) => measures_from_state(&state)?,
    };
    let family = params.family();
    let run = |opts: &OptimizerOptions| -> Result<(f64, f64, BoundCheck)> {
        let mm = maximize(&state, BellMode::Mermin, opts)?.value;
        let ms = maximize(&state, BellMode::Svetlichny, opts)?.value;
        let check = check_record(measures.tau, measures.sigma, mm, ms, slack)?;
        Ok((mm, ms, check))
    };
    let mut opts = OptimizerOptions { seed: record_seed(opts.seed, state_id), ..*opts };
    let (mut mm, mut ms, mut check) = run(&opts)?;
    let mut escalated = false;
    if check.undershoot_suspect(family.tau_bounded(), true) {
        opts.restarts *= ESCALATION_FACTOR;
        (mm, ms, check) = run(&opts)?;
        escalated = true;
    }
    Ok(SweepRecord {
        state_id,
        params,
        tau: measures.tau,
        sigma: measures.sigma,
        m_mermin: mm,
        m_svet: ms,
        check,
        escalated,
    })
}

/// Runs a full sweep; records come back ordered by `state_id` whatever the
/// worker count.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRecord>> {
    if config.n_samples == 0 {
        return Err(Error::OutOfRange { value: 0.0, lo: 1.0, hi: f64::INFINITY });
    }
    let params = sample_params(config.family, config.seed, config.n_samples);
    let work = || -> Result<Vec<SweepRecord>> {
        params
            .par_iter()
            .enumerate()
            .map(|(id, p)| evaluate(id, *p, &config.optimizer, config.slack))
            .collect()
    };
    match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Locale-independent rendering with 9 significant digits.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let mag = x.abs();
    if (1e-4..1e9).contains(&mag) {
        let decimals = (8 - mag.log10().floor() as i32).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        let mut row: Vec<String> = vec![r.state_id.to_string(), r.family().to_string()];
        row.extend(r.params.columns().iter().map(|c| c.map(format_number).unwrap_or_default()));
        row.extend([r.tau, r.sigma, r.m_mermin, r.m_svet].map(format_number));
        row.extend(
            [r.check.tau_ok_mermin(), r.check.sigma_ok_mermin(), r.check.tau_ok_svet(), r.check.sigma_ok_svet()]
                .map(|b| b.to_string()),
        );
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

/// The numeric content of one CSV row, enough to re-check bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub state_id: usize,
    pub family: Family,
    pub params: [Option<f64>; 6],
    pub tau: f64,
    pub sigma: f64,
    pub m_mermin: f64,
    pub m_svet: f64,
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header: {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse(format!("row {}: bad {} value {:?}", line + 1, CSV_HEADER[i], field(i))))
        };
        let mut params = [None; 6];
        for (k, p) in params.iter_mut().enumerate() {
            if !field(2 + k).is_empty() {
                *p = Some(num(2 + k)?);
            }
        }
        rows.push(CsvRow {
            state_id: field(0).parse().map_err(|_| Error::Parse(format!("row {}: bad state_id", line + 1)))?,
            family: field(1).parse()?,
            params,
            tau: num(8)?,
            sigma: num(9)?,
            m_mermin: num(10)?,
            m_svet: num(11)?,
        });
    }
    Ok(rows)
}

/// Pass/fail tally for one (measure, inequality) pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    /// Smallest margin seen (negative when some record fails).
    pub worst_margin: Option<f64>,
    /// Whether the bound is claimed for every record counted here.
    pub claimed: bool,
}

impl Tally {
    fn add(&mut self, ok: bool, margin: f64) {
        if ok {
            self.pass += 1;
        } else {
            self.fail += 1;
        }
        self.worst_margin = Some(self.worst_margin.map_or(margin, |w| w.min(margin)));
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundsReport {
    pub records: usize,
    pub tau_mermin: Tally,
    pub sigma_mermin: Tally,
    pub tau_svet: Tally,
    pub sigma_svet: Tally,
    /// Records that fail a bound claimed for their family.
    pub violations: Vec<usize>,
    /// Records that fail only bounds not claimed for their family (τ on canonical5).
    pub unclaimed_failures: Vec<usize>,
    /// Records where the Svetlichny lower bound exceeds the Mermin one.
    pub svet_lower_stricter: usize,
}

impl BoundsReport {
    pub fn confirmed_violations(&self) -> usize {
        self.violations.len()
    }
}

/// Re-checks records against the bounds with the given slack.
pub fn bounds_report(rows: &[CsvRow], slack: f64) -> Result<BoundsReport> {
    let mut report = BoundsReport {
        records: rows.len(),
        sigma_mermin: Tally { claimed: true, ..Default::default() },
        sigma_svet: Tally { claimed: true, ..Default::default() },
        tau_mermin: Tally { claimed: true, ..Default::default() },
        tau_svet: Tally { claimed: true, ..Default::default() },
        ..Default::default()
    };
    for row in rows {
        let c = check_record(row.tau, row.sigma, row.m_mermin, row.m_svet, slack)?;
        let tau_claimed = row.family.tau_bounded();
        report.tau_mermin.add(c.tau_mermin.ok, c.tau_mermin.margin);
        report.sigma_mermin.add(c.sigma_mermin.ok, c.sigma_mermin.margin);
        report.tau_svet.add(c.tau_svet.ok, c.tau_svet.margin);
        report.sigma_svet.add(c.sigma_svet.ok, c.sigma_svet.margin);
        if !tau_claimed {
            report.tau_mermin.claimed = false;
            report.tau_svet.claimed = false;
        }
        let sigma_fail = !(c.sigma_mermin.ok && c.sigma_svet.ok);
        let tau_fail = !(c.tau_mermin.ok && c.tau_svet.ok);
        if sigma_fail || (tau_claimed && tau_fail) {
            report.violations.push(row.state_id);
        } else if tau_fail {
            report.unclaimed_failures.push(row.state_id);
        }
        if c.svet_lower > c.mermin_lower {
            report.svet_lower_stricter += 1;
        }
    }
    Ok(report)
}

pub fn rows_from_records(records: &[SweepRecord]) -> Vec<CsvRow> {
    records
        .iter()
        .map(|r| CsvRow {
            state_id: r.state_id,
            family: r.family(),
            params: r.params.columns(),
            tau: r.tau,
            sigma: r.sigma,
            m_mermin: r.m_mermin,
            m_svet: r.m_svet,
        })
        .collect()
}

/// A labelled point added to every scatter file, e.g. the GHZ corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub label: String,
    pub tau: f64,
    pub sigma: f64,
    pub m_mermin: f64,
    pub m_svet: f64,
}

/// Evaluates a named reference state for use as an [`Anchor`].
pub fn anchor(label: &str, state: &PureState3Q, opts: &OptimizerOptions) -> Result<Anchor> {
    let m = measures_from_state(state)?;
    Ok(Anchor {
        label: label.to_string(),
        tau: m.tau,
        sigma: m.sigma,
        m_mermin: maximize(state, BellMode::Mermin, opts)?.value,
        m_svet: maximize(state, BellMode::Svetlichny, opts)?.value,
    })
}

/// Points per sampled bound curve.
pub const CURVE_POINTS: usize = 401;

/// Names of the files written by [`write_figure_data`].
pub const FIGURE_FILES: [&str; 8] = [
    "mm_tau.dat",
    "mm_sigma.dat",
    "ms_tau.dat",
    "ms_sigma.dat",
    "bound_mermin_lower.dat",
    "bound_mermin_upper.dat",
    "bound_svetlichny_lower.dat",
    "bound_svetlichny_upper.dat",
];

/// Writes the four (M, measure) scatter files and the sampled bound curves
/// into `dir` as whitespace-separated two-column text. Anchors are appended to
/// each scatter file after a `# anchor` comment.
pub fn write_figure_data(records: &[SweepRecord], anchors: &[Anchor], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let write = |name: &str, body: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    };
    type Pick = fn(f64, f64, f64, f64) -> (f64, f64);
    let scatters: [(&str, &str, Pick); 4] = [
        (FIGURE_FILES[0], "m_mermin tau", |t, _, mm, _| (mm, t)),
        (FIGURE_FILES[1], "m_mermin sigma", |_, s, mm, _| (mm, s)),
        (FIGURE_FILES[2], "m_svet tau", |t, _, _, ms| (ms, t)),
        (FIGURE_FILES[3], "m_svet sigma", |_, s, _, ms| (ms, s)),
    ];
    for (name, columns, pick) in scatters {
        let mut body = format!("# {columns}\n");
        for r in records {
            let (x, y) = pick(r.tau, r.sigma, r.m_mermin, r.m_svet);
            body.push_str(&format!("{} {}\n", format_number(x), format_number(y)));
        }
        for a in anchors {
            let (x, y) = pick(a.tau, a.sigma, a.m_mermin, a.m_svet);
            body.push_str(&format!("# anchor {}\n{} {}\n", a.label, format_number(x), format_number(y)));
        }
        write(name, body)?;
    }

    let curve = |max: f64, f: &dyn Fn(f64) -> Result<(f64, f64)>, upper: bool| -> Result<String> {
        let mut body = String::from("# m bound\n");
        for i in 0..CURVE_POINTS {
            let m = if i + 1 == CURVE_POINTS { max } else { max * i as f64 / (CURVE_POINTS - 1) as f64 };
            let (lo, hi) = f(m)?;
            body.push_str(&format!("{} {}\n", format_number(m), format_number(if upper { hi } else { lo })));
        }
        Ok(body)
    };
    write(FIGURE_FILES[4], curve(4.0, &mermin_bounds, false)?)?;
    write(FIGURE_FILES[5], curve(4.0, &mermin_bounds, true)?)?;
    write(FIGURE_FILES[6], curve(4.0 * SQRT_2, &svetlichny_bounds, false)?)?;
    write(FIGURE_FILES[7], curve(4.0 * SQRT_2, &svetlichny_bounds, true)?)?;
    Ok(())
}
