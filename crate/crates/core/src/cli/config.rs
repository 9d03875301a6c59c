use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bloch::{KGrid, MassParameter, MomentumPoint};
use crate::memory::BranchHint;
use crate::quench::{default_t_max, DEFAULT_DT};
use crate::topology::DEFAULT_DISK_RADIUS;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    PhaseDiagram,
    Quench,
    ScanPeriod,
    Coincidence,
    Decode,
    ExportField,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::PhaseDiagram => "phase-diagram",
            Command::Quench => "quench",
            Command::ScanPeriod => "scan-period",
            Command::Coincidence => "coincidence",
            Command::Decode => "decode",
            Command::ExportField => "export-field",
        };
        f.write_str(s)
    }
}

/// Probe momentum: `pi-pi`, `zero-zero` or an explicit `kx,ky`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Probe {
    PiPi,
    ZeroZero,
    Explicit(f64, f64),
}

impl Probe {
    pub fn point(&self) -> MomentumPoint {
        match *self {
            Probe::PiPi => MomentumPoint::M,
            Probe::ZeroZero => MomentumPoint::GAMMA,
            Probe::Explicit(kx, ky) => MomentumPoint::new(kx, ky),
        }
    }
}

impl FromStr for Probe {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "pi-pi" => Ok(Probe::PiPi),
            "zero-zero" => Ok(Probe::ZeroZero),
            other => {
                let parts: Vec<&str> = other.split(',').collect();
                let parse = |x: &str| x.trim().parse::<f64>().ok().filter(|v| v.is_finite());
                match parts.as_slice() {
                    [a, b] => match (parse(a), parse(b)) {
                        (Some(kx), Some(ky)) => Ok(Probe::Explicit(kx, ky)),
                        _ => Err(format!("probe '{other}': expected two finite numbers")),
                    },
                    _ => Err(format!(
                        "probe '{other}': expected pi-pi, zero-zero or kx,ky"
                    )),
                }
            }
        }
    }
}

impl TryFrom<String> for Probe {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Probe> for String {
    fn from(p: Probe) -> String {
        p.to_string()
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Probe::PiPi => f.write_str("pi-pi"),
            Probe::ZeroZero => f.write_str("zero-zero"),
            Probe::Explicit(kx, ky) => write!(f, "{kx},{ky}"),
        }
    }
}

/// Fully resolved run configuration (defaults, then file, then flags).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub m_initial: f64,
    pub m_quench: f64,
    pub n_side: usize,
    pub dt: f64,
    /// `None` picks 10 periods at the probe, capped at 1000.
    pub t_max: Option<f64>,
    pub probe: Probe,
    pub disk_radius: f64,
    /// Probe-loop radius for vorticity; `None` means one grid spacing.
    pub loop_radius: Option<f64>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub masses: Vec<f64>,
    pub export_time: f64,
    pub branch: Option<BranchHint>,
    pub quench_time: f64,
    /// Existing vorticity.csv to decode instead of simulating.
    pub series: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        let masses = match command {
            Command::PhaseDiagram => vec![-3.0, -1.0, 1.0, 3.0],
            _ => vec![-1.5, -1.0, -0.5, 0.5, 1.0, 1.5],
        };
        Self {
            command,
            m_initial: 3.0,
            m_quench: 1.0,
            n_side: KGrid::DEFAULT_N_SIDE,
            dt: DEFAULT_DT,
            t_max: None,
            probe: Probe::PiPi,
            disk_radius: DEFAULT_DISK_RADIUS,
            loop_radius: None,
            output_dir: PathBuf::from("qwzmem-out"),
            seed: 0,
            masses,
            export_time: 0.0,
            branch: None,
            quench_time: 0.0,
            series: None,
        }
    }

    pub fn grid(&self) -> KGrid {
        KGrid::new(self.n_side).expect("validated")
    }

    pub fn loop_radius(&self) -> f64 {
        self.loop_radius.unwrap_or_else(|| self.grid().spacing())
    }

    /// `t_max` for a quench to `m_quench` observed at `probe`.
    pub fn t_max_for(&self, m_quench: f64, probe: MomentumPoint) -> Result<f64, CliError> {
        match self.t_max {
            Some(t) => Ok(t),
            None => default_t_max(m_quench, probe).map_err(|_| {
                CliError::Config(format!(
                    "t_max: the gap closes at {probe} for m_quench = {m_quench}; set --t-max explicitly"
                ))
            }),
        }
    }

    /// Checks every precondition that can be checked before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        let finite = [
            ("m_initial", self.m_initial),
            ("m_quench", self.m_quench),
            ("dt", self.dt),
            ("disk_radius", self.disk_radius),
            ("export_time", self.export_time),
            ("quench_time", self.quench_time),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        let grid = match KGrid::new(self.n_side) {
            Ok(g) => g,
            Err(e) => return bad(format!("n_side: {e}")),
        };
        if self.dt <= 0.0 {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if let Some(t) = self.t_max {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("t_max must be positive, got {t}"));
            }
            if self.dt > t {
                return bad(format!("dt = {} exceeds t_max = {t}", self.dt));
            }
        }
        if self.quench_time < 0.0 {
            return bad(format!(
                "quench_time must be >= 0, got {}",
                self.quench_time
            ));
        }
        if self.export_time < 0.0 {
            return bad(format!(
                "export_time must be >= 0, got {}",
                self.export_time
            ));
        }
        let h = grid.spacing();
        if let Some(r) = self.loop_radius {
            if !(r.is_finite() && r >= 0.75 * h && r <= std::f64::consts::FRAC_PI_2) {
                return bad(format!(
                    "loop_radius {r} must lie in [{}, π/2] for n_side = {}",
                    0.75 * h,
                    self.n_side
                ));
            }
        }
        let probe = self.probe.point();
        let uses_probe = !matches!(self.command, Command::PhaseDiagram | Command::ExportField);
        if uses_probe && grid.node_of(&probe).is_none() {
            return bad(format!(
                "probe {} is not a node of the {n}×{n} grid",
                self.probe,
                n = self.n_side
            ));
        }
        let quench = !matches!(self.command, Command::PhaseDiagram);
        if quench && MassParameter(self.m_initial).is_critical() {
            return bad(format!(
                "m_initial = {} is critical (0 or ±2); the initial state is gapless",
                self.m_initial
            ));
        }
        match self.command {
            Command::PhaseDiagram => {
                if !(self.disk_radius >= 0.75 * h && self.disk_radius <= 0.5) {
                    return bad(format!(
                        "disk_radius {} must lie in [{}, 0.5]",
                        self.disk_radius,
                        0.75 * h
                    ));
                }
                self.check_masses()?;
                if let Some(m) = self
                    .masses
                    .iter()
                    .find(|&&m| MassParameter(m).is_critical())
                {
                    return bad(format!(
                        "masses: m = {m} is critical (0 or ±2); the Chern number is undefined there"
                    ));
                }
            }
            Command::ScanPeriod => {
                self.check_masses()?;
                if self.t_max.is_none() {
                    for &m in &self.masses {
                        self.t_max_for(m, probe)?;
                    }
                }
            }
            Command::Quench | Command::Coincidence => {
                self.t_max_for(self.m_quench, probe)?;
            }
            Command::Decode => {
                if let Some(path) = &self.series {
                    if !matches!(self.probe, Probe::PiPi | Probe::ZeroZero) {
                        return bad("decode: probe must be pi-pi or zero-zero".into());
                    }
                    if !path.is_file() {
                        return bad(format!("series: {} is not a file", path.display()));
                    }
                } else {
                    self.t_max_for(self.m_quench, MomentumPoint::M)?;
                    self.t_max_for(self.m_quench, MomentumPoint::GAMMA)?;
                }
            }
            Command::ExportField => {}
        }
        Ok(())
    }

    fn check_masses(&self) -> Result<(), CliError> {
        if self.masses.is_empty() {
            return Err(CliError::Config(
                "masses: at least one value is required".into(),
            ));
        }
        if let Some(m) = self.masses.iter().find(|m| !m.is_finite()) {
            return Err(CliError::Config(format!("masses: {m} is not finite")));
        }
        Ok(())
    }
}

/// Optional keys of a TOML config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<Command>,
    pub m_initial: Option<f64>,
    pub m_quench: Option<f64>,
    pub n_side: Option<usize>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub probe: Option<Probe>,
    pub disk_radius: Option<f64>,
    pub loop_radius: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub masses: Option<Vec<f64>>,
    pub export_time: Option<f64>,
    pub branch: Option<BranchHint>,
    pub quench_time: Option<f64>,
    pub series: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "qwzmem",
    version,
    about = "Chern numbers, topological quenches and vortex memory of the two-band QAH model"
)]
pub struct Args {
    /// Pipeline to run.
    pub command: Command,
    /// TOML file with run parameters; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub m_initial: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub m_quench: Option<f64>,
    #[arg(long)]
    pub n_side: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// pi-pi, zero-zero or kx,ky
    #[arg(long, allow_hyphen_values = true)]
    pub probe: Option<Probe>,
    #[arg(long)]
    pub disk_radius: Option<f64>,
    #[arg(long)]
    pub loop_radius: Option<f64>,
    /// Output directory, replaced atomically.
    #[arg(long = "out")]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated masses for phase-diagram and scan-period.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub masses: Option<Vec<f64>>,
    /// Snapshot time for export-field.
    #[arg(long = "t")]
    pub export_time: Option<f64>,
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    /// Delay of the quench.
    #[arg(long = "tau")]
    pub quench_time: Option<f64>,
    /// vorticity.csv to decode instead of simulating.
    #[arg(long)]
    pub series: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Above,
    Below,
}

impl From<BranchArg> for BranchHint {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Above => BranchHint::Above,
            BranchArg::Below => BranchHint::Below,
        }
    }
}

impl Args {
    /// Layers defaults, the config file and the flags, then validates.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        if let Some(c) = file.command {
            if c != self.command {
                return Err(CliError::Config(format!(
                    "config file is for '{c}' but '{}' was requested",
                    self.command
                )));
            }
        }
        let mut c = RunConfig::new(self.command);
        macro_rules! layer {
            ($($field:ident),*) => {$(
                if let Some(v) = file.$field.clone() { c.$field = v; }
                if let Some(v) = self.$field.clone() { c.$field = v; }
            )*};
        }
        layer!(
            m_initial,
            m_quench,
            n_side,
            dt,
            probe,
            disk_radius,
            output_dir,
            seed,
            masses,
            export_time,
            quench_time
        );
        macro_rules! layer_opt {
            ($($field:ident),*) => {$(
                if file.$field.is_some() { c.$field = file.$field.clone(); }
                if self.$field.is_some() { c.$field = self.$field.clone(); }
            )*};
        }
        layer_opt!(t_max, loop_radius, series);
        c.branch = self.branch.map(BranchHint::from).or(file.branch);
        c.validate()?;
        Ok(c)
    }
}
