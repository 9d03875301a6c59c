//! The `qwzmem` command line: configuration, pipelines and run output.
//!
//! Every run writes into a staging directory that replaces `output_dir` in
//! one rename, together with a `manifest.json` holding the resolved
//! configuration and the SHA-256 of every file.

mod config;
mod output;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::bloch::{ground_state_field_masked, Gauge, MomentumPoint};
use crate::error::Error;
use crate::memory::{
    coincidence_test, decode_from_period, decode_joint, estimate_period, flip_times,
    scan_period_with, vorticity_series, DecodedMass, PeriodEstimate, ScanSettings, VorticitySeries,
};
use crate::quench::{
    evolve_field, loschmidt_series, LoschmidtSeries, QuenchProtocol, TextureField,
};
use crate::topology::{
    berry_connection_lenient, chern_fhs, chern_patchwise_with_radius, hall_conductance,
};

pub use config::{Args, BranchArg, Command, ConfigFile, Probe, RunConfig};
pub use output::{num, FileRecord, Staging, CSV_SCHEMA_VERSION, MANIFEST_SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Domain {
        context: String,
        #[source]
        source: Error,
    },
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    fn domain(context: impl Into<String>) -> impl FnOnce(Error) -> CliError {
        let context = context.into();
        move |source| CliError::Domain { context, source }
    }

    /// 2 configuration, 4 too few oscillations, 3 other domain errors, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain { source, .. } => match source.root() {
                Error::InsufficientCycles { .. } => 4,
                _ => 3,
            },
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub files: Vec<FileRecord>,
    pub wall_time_seconds: f64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub summary: Vec<String>,
}

/// Executes the configured pipeline and writes its outputs atomically.
pub fn run(config: &RunConfig) -> Result<RunManifest, CliError> {
    config.validate()?;
    let start = Instant::now();
    let mut out = Staging::new(&config.output_dir)?;
    let summary = match config.command {
        Command::PhaseDiagram => phase_diagram(config, &mut out)?,
        Command::Quench => quench(config, &mut out)?,
        Command::ScanPeriod => scan_period(config, &mut out)?,
        Command::Coincidence => coincidence(config, &mut out)?,
        Command::Decode => decode(config, &mut out)?,
        Command::ExportField => export_field(config, &mut out)?,
    };
    let mut manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool: "qwzmem",
        version: env!("CARGO_PKG_VERSION"),
        config: config.clone(),
        files: out.files().to_vec(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        output_dir: PathBuf::new(),
        summary,
    };
    manifest.output_dir = out.commit(&manifest)?;
    Ok(manifest)
}

fn protocol(
    c: &RunConfig,
    m_quench: f64,
    probe: MomentumPoint,
) -> Result<QuenchProtocol, CliError> {
    let t_max = c.t_max_for(m_quench, probe)?;
    QuenchProtocol::new(c.m_initial, m_quench, t_max, c.dt)
        .and_then(|p| p.with_quench_time(c.quench_time))
        .map_err(CliError::domain(format!(
            "quench m = {} → m' = {m_quench}",
            c.m_initial
        )))
}

fn series_at(
    c: &RunConfig,
    p: &QuenchProtocol,
    probe: MomentumPoint,
) -> Result<VorticitySeries, CliError> {
    vorticity_series(p, c.grid(), probe, c.loop_radius()).map_err(CliError::domain(format!(
        "vorticity at {probe} (loop radius {}); move the probe or change --loop-radius",
        c.loop_radius()
    )))
}

fn write_vorticity(out: &mut Staging, s: &VorticitySeries) -> Result<(), CliError> {
    out.csv(
        "vorticity.csv",
        &["t", "index", "raw_winding"],
        s.times
            .iter()
            .zip(&s.indices)
            .zip(&s.raw_windings)
            .map(|((t, i), w)| vec![num(*t), i.to_string(), w.to_string()]),
    )
}

fn write_loschmidt(out: &mut Staging, l: &LoschmidtSeries) -> Result<(), CliError> {
    out.csv(
        "loschmidt.csv",
        &["t", "re", "im", "abs"],
        l.times
            .iter()
            .zip(&l.values)
            .map(|(t, v)| vec![num(*t), num(v.re), num(v.im), num(v.norm())]),
    )
}

fn phase_diagram(c: &RunConfig, out: &mut Staging) -> Result<Vec<String>, CliError> {
    let grid = c.grid();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &m in &c.masses {
        let ctx = format!("Chern number at m = {m}");
        let cp = chern_patchwise_with_radius(m, grid, c.disk_radius).map_err(CliError::domain(
            format!("{ctx} (disk radius {})", c.disk_radius),
        ))?;
        let cf = chern_fhs(&ground_state_field_masked(m, grid, Gauge::Patched))
            .map_err(CliError::domain(ctx))?;
        summary.push(format!("m = {m}: C = {cp} (patches), {cf} (plaquettes)"));
        rows.push(vec![
            num(m),
            cp.to_string(),
            cf.to_string(),
            num(hall_conductance(cp)),
        ]);
    }
    out.csv(
        "phase_diagram.csv",
        &["m", "c_patchwise", "c_fhs", "sigma_xy"],
        rows,
    )?;
    Ok(summary)
}

fn quench(c: &RunConfig, out: &mut Staging) -> Result<Vec<String>, CliError> {
    let probe = c.probe.point();
    let p = protocol(c, c.m_quench, probe)?;
    let v = series_at(c, &p, probe)?;
    let l =
        loschmidt_series(&p, probe).map_err(CliError::domain(format!("Loschmidt at {probe}")))?;
    write_vorticity(out, &v)?;
    write_loschmidt(out, &l)?;
    let flips = flip_times(&v);
    let mut summary = vec![format!("{} samples, {} flips", v.len(), flips.len())];
    if let Ok(e) = estimate_period(&flips, v.dt) {
        summary.push(format!("period {} ± {}", e.period, e.uncertainty));
    }
    Ok(summary)
}

fn scan_period(c: &RunConfig, out: &mut Staging) -> Result<Vec<String>, CliError> {
    let settings = ScanSettings {
        t_max: c.t_max,
        dt: c.dt,
        radius: c.loop_radius(),
        ..ScanSettings::new(c.m_initial, c.grid(), c.probe.point())
    };
    let rows = scan_period_with(&settings, &c.masses);
    let mut summary = Vec::new();
    let table = rows.iter().map(|r| {
        let (measured, cycles) = match &r.measured {
            Ok(p) => (p.period, p.n_cycles_used),
            Err(_) => (f64::NAN, 0),
        };
        let theory = r.theory.as_ref().copied().unwrap_or(f64::NAN);
        match &r.measured {
            Ok(_) => summary.push(format!("m' = {}: {measured} vs {theory}", r.m_quench)),
            Err(e) => summary.push(format!("m' = {}: {e}", r.m_quench)),
        }
        vec![
            num(r.m_quench),
            num(measured),
            num(theory),
            num(measured / theory),
            cycles.to_string(),
        ]
    });
    let table: Vec<Vec<String>> = table.collect();
    out.csv(
        "period_scan.csv",
        &[
            "m_quench",
            "period_measured",
            "period_theory",
            "ratio",
            "n_cycles",
        ],
        table,
    )?;
    Ok(summary)
}

fn coincidence(c: &RunConfig, out: &mut Staging) -> Result<Vec<String>, CliError> {
    let probe = c.probe.point();
    let p = protocol(c, c.m_quench, probe)?;
    let v = series_at(c, &p, probe)?;
    let l =
        loschmidt_series(&p, probe).map_err(CliError::domain(format!("Loschmidt at {probe}")))?;
    let co = coincidence_test(&l, &v).map_err(CliError::domain(format!(
        "coincidence at {probe}; refine --dt"
    )))?;
    write_vorticity(out, &v)?;
    write_loschmidt(out, &l)?;
    out.csv(
        "coincidence.csv",
        &["flip_time", "sign_change_time", "offset"],
        co.matched_pairs
            .iter()
            .map(|(f, s)| vec![num(*f), num(*s), num(s - f)]),
    )?;
    Ok(vec![format!(
        "{} flips matched, max offset {} (dt = {})",
        co.matched_pairs.len(),
        co.max_offset,
        c.dt
    )])
}

/// Reads `t,index,raw_winding` rows written by the quench pipeline.
pub fn read_vorticity_csv(path: &Path, probe: MomentumPoint) -> Result<VorticitySeries, CliError> {
    let bad =
        |e: &dyn std::fmt::Display| CliError::Config(format!("series {}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(&e))?;
    let header = r.headers().map_err(|e| bad(&e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["t", "index", "raw_winding"] {
        return Err(bad(&"expected header t,index,raw_winding"));
    }
    let mut s = VorticitySeries {
        probe,
        dt: 0.0,
        times: Vec::new(),
        indices: Vec::new(),
        raw_windings: Vec::new(),
        circulations: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(&e))?;
        let t: f64 = rec[0].parse().map_err(|e| bad(&e))?;
        let i: i8 = rec[1].parse().map_err(|e| bad(&e))?;
        let w: i32 = rec[2].parse().map_err(|e| bad(&e))?;
        if !(-1..=1).contains(&i) {
            return Err(bad(&format!("index {i} outside -1..1")));
        }
        s.times.push(t);
        s.indices.push(i);
        s.raw_windings.push(w);
        s.circulations.push(f64::NAN);
    }
    if s.times.len() < 2 || s.times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad(&"need at least two strictly increasing times"));
    }
    s.dt = s.times[1] - s.times[0];
    Ok(s)
}

fn decode(c: &RunConfig, out: &mut Staging) -> Result<Vec<String>, CliError> {
    let header = [
        "method",
        "probe",
        "period",
        "period_uncertainty",
        "candidate_low",
        "candidate_high",
        "m_decoded",
        "uncertainty",
    ];
    let offset = |probe: MomentumPoint| if probe == MomentumPoint::M { -2.0 } else { 2.0 };
    let row = |method: &str, probe: Probe, e: &PeriodEstimate, d: Option<DecodedMass>| {
        let o = offset(probe.point());
        vec![
            method.to_string(),
            probe.to_string(),
            num(e.period),
            num(e.uncertainty),
            num(o - PI / e.period),
            num(o + PI / e.period),
            num(d.map_or(f64::NAN, |d| d.m_quench.value())),
            num(d.map_or(f64::NAN, |d| d.uncertainty)),
        ]
    };
    let period_of = |s: &VorticitySeries| {
        estimate_period(&flip_times(s), s.dt).map_err(CliError::domain(format!(
            "period at {}; raise --t-max",
            s.probe
        )))
    };
    if let Some(path) = &c.series {
        let s = read_vorticity_csv(path, c.probe.point())?;
        let e = period_of(&s)?;
        let d = decode_from_period(&e, s.probe, c.branch).map_err(CliError::domain(
            "decode; pass --branch above|below or decode two probes jointly",
        ))?;
        out.csv("decode.csv", &header, [row("single", c.probe, &e, Some(d))])?;
        return Ok(vec![format!(
            "m' = {} ± {}",
            d.m_quench.value(),
            d.uncertainty
        )]);
    }
    let mut rows = Vec::new();
    let mut periods = Vec::new();
    for probe in [Probe::PiPi, Probe::ZeroZero] {
        let p = protocol(c, c.m_quench, probe.point())?;
        let s = series_at(c, &p, probe.point())?;
        let e = period_of(&s)?;
        let d = c
            .branch
            .map(|b| decode_from_period(&e, probe.point(), Some(b)))
            .transpose()
            .map_err(CliError::domain("decode"))?;
        rows.push(row("single", probe, &e, d));
        periods.push((e, probe.point()));
    }
    let j = decode_joint((&periods[0].0, periods[0].1), (&periods[1].0, periods[1].1))
        .map_err(CliError::domain("joint decode"))?;
    rows.push(vec![
        "joint".into(),
        "pi-pi+zero-zero".into(),
        num(f64::NAN),
        num(f64::NAN),
        num(f64::NAN),
        num(f64::NAN),
        num(j.m_quench.value()),
        num(j.uncertainty),
    ]);
    out.csv("decode.csv", &header, rows)?;
    Ok(vec![format!(
        "joint decode: m' = {} ± {} (true {})",
        j.m_quench.value(),
        j.uncertainty,
        c.m_quench
    )])
}

fn export_field(c: &RunConfig, out: &mut Staging) -> Result<Vec<String>, CliError> {
    let grid = c.grid();
    let t = c.export_time;
    let p = QuenchProtocol::new(c.m_initial, c.m_quench, t.max(c.dt), c.dt)
        .and_then(|p| p.with_quench_time(c.quench_time))
        .map_err(CliError::domain("export-field protocol"))?;
    let state = evolve_field(&p, grid, t);
    let conn = berry_connection_lenient(&state.field);
    let texture = TextureField::from_field(&state.field);
    let mut rows = Vec::with_capacity(grid.len());
    let mut tex_rows = Vec::with_capacity(grid.len());
    let mut flagged = 0;
    for idx in 0..grid.len() {
        let (ix, iy) = grid.coords(idx);
        let k = grid.point(ix, iy);
        let (ax, ay) = (conn.ax(ix, iy), conn.ay(ix, iy));
        let spinor = state.field.get(ix, iy);
        // 1: excluded node, 2: singular link
        let flag = if spinor.is_none() {
            1
        } else if !(ax.is_finite() && ay.is_finite()) {
            2
        } else {
            0
        };
        if flag != 0 {
            flagged += 1;
        }
        let density = spinor.map_or(f64::NAN, |s| s.c1.norm_sqr());
        rows.push(vec![
            num(k.kx()),
            num(k.ky()),
            num(ax),
            num(ay),
            num(density),
            flag.to_string(),
        ]);
        let s = texture.spin(ix, iy).unwrap_or([f64::NAN; 3]);
        tex_rows.push(vec![
            num(k.kx()),
            num(k.ky()),
            num(s[0]),
            num(s[1]),
            num(s[2]),
            u8::from(spinor.is_none()).to_string(),
        ]);
    }
    out.csv(
        &format!("field_t{}.csv", num(t)),
        &["kx", "ky", "ax", "ay", "density1", "flag"],
        rows,
    )?;
    out.csv(
        &format!("texture_t{}.csv", num(t)),
        &["kx", "ky", "sx", "sy", "sz", "flag"],
        tex_rows,
    )?;
    Ok(vec![format!(
        "{} nodes at t = {t}, {flagged} flagged",
        grid.len()
    )])
}

/// Parses, runs and reports; returns the process exit code.
pub fn main_with(args: &Args) -> i32 {
    let result = args.resolve().and_then(|c| run(&c));
    match result {
        Ok(m) => {
            for line in &m.summary {
                println!("{line}");
            }
            println!(
                "wrote {} files to {}",
                m.files.len() + 1,
                m.output_dir.display()
            );
            0
        }
        Err(e) => {
            eprintln!("qwzmem: {e}");
            e.exit_code()
        }
    }
}
