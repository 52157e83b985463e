//! Run configuration: TOML with nested blocks, parsed by hand so that every
//! violation (including unknown keys) is reported in one pass.

use serde::Serialize;
use toml::Value;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::maxwell_stefan::FrictionMatrix;
use crate::sources::SourceConfig;
use crate::thermo::{ThermoModel, ValidityDomain};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeciesBlock {
    pub n: usize,
    #[serde(rename = "R")]
    pub r: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityBlock {
    pub gamma: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermoBlock {
    pub rho_floor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrictionBlock {
    pub b: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_sweep: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridBlock {
    pub ncells: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum IcPreset {
    Uniform {
        rho: Vec<f64>,
        v: f64,
        theta: f64,
    },
    GaussianBump {
        base_rho: Vec<f64>,
        amp_rho: Vec<f64>,
        center: f64,
        width: f64,
        base_v: f64,
        amp_v: f64,
        base_theta: f64,
        amp_theta: f64,
    },
    TwoState {
        rho_left: Vec<f64>,
        rho_right: Vec<f64>,
        v_left: f64,
        v_right: f64,
        theta_left: f64,
        theta_right: f64,
        transition_width: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcBlock {
    #[serde(flatten)]
    pub preset: IcPreset,
    pub well_prepared: bool,
    /// Per-species velocity offsets applied to Class-II initial data when the
    /// run is not well prepared.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dv: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeBlock {
    pub t_end: f64,
    pub cfl_number: f64,
    pub snapshot_interval: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourcesBlock {
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputsBlock {
    pub directory: String,
    pub formats: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsBlock {
    pub coercivity_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepBlock {
    pub slope_threshold: f64,
    pub workers: usize,
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub species: SpeciesBlock,
    pub validity: ValidityBlock,
    pub thermo: ThermoBlock,
    pub friction: FrictionBlock,
    pub grid: GridBlock,
    pub ic: IcBlock,
    pub time: TimeBlock,
    pub sources: SourcesBlock,
    pub outputs: OutputsBlock,
    pub diagnostics: DiagnosticsBlock,
    pub sweep: SweepBlock,
}

struct Reader<'a> {
    table: &'a toml::Table,
    path: String,
    seen: Vec<String>,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(table: &'a toml::Table, path: &str) -> Self {
        Self {
            table,
            path: path.to_string(),
            seen: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn key(&self, name: &str) -> String {
        if self.path.is_empty() {
            name.to_string()
        } else {
            format!("{}.{name}", self.path)
        }
    }

    fn get(&mut self, name: &str) -> Option<&'a Value> {
        self.seen.push(name.to_string());
        self.table.get(name)
    }

    fn f64(&mut self, name: &str) -> Option<f64> {
        match self.get(name) {
            Some(Value::Float(f)) => Some(*f),
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(_) => {
                let k = self.key(name);
                self.errors.push(format!("`{k}` must be a number"));
                None
            }
            None => {
                let k = self.key(name);
                self.errors.push(format!("missing key `{k}`"));
                None
            }
        }
    }

    fn f64_or(&mut self, name: &str, default: f64) -> f64 {
        match self.get(name) {
            Some(Value::Float(f)) => *f,
            Some(Value::Integer(i)) => *i as f64,
            Some(_) => {
                let k = self.key(name);
                self.errors.push(format!("`{k}` must be a number"));
                default
            }
            None => default,
        }
    }

    fn usize_field(&mut self, name: &str) -> Option<usize> {
        match self.get(name) {
            Some(Value::Integer(i)) if *i >= 0 => Some(*i as usize),
            Some(_) => {
                let k = self.key(name);
                self.errors.push(format!("`{k}` must be a nonnegative integer"));
                None
            }
            None => {
                let k = self.key(name);
                self.errors.push(format!("missing key `{k}`"));
                None
            }
        }
    }

    fn usize_or(&mut self, name: &str, default: usize) -> usize {
        match self.get(name) {
            Some(Value::Integer(i)) if *i >= 0 => *i as usize,
            Some(_) => {
                let k = self.key(name);
                self.errors.push(format!("`{k}` must be a nonnegative integer"));
                default
            }
            None => default,
        }
    }

    fn bool_or(&mut self, name: &str, default: bool) -> bool {
        match self.get(name) {
            Some(Value::Boolean(b)) => *b,
            Some(_) => {
                let k = self.key(name);
                self.errors.push(format!("`{k}` must be a boolean"));
                default
            }
            None => default,
        }
    }

    fn string(&mut self, name: &str) -> Option<String> {
        match self.get(name) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(_) => {
                let k = self.key(name);
                self.errors.push(format!("`{k}` must be a string"));
                None
            }
            None => {
                let k = self.key(name);
                self.errors.push(format!("missing key `{k}`"));
                None
            }
        }
    }

    fn f64_array(&mut self, name: &str) -> Option<Vec<f64>> {
        match self.get(name) {
            Some(Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for (idx, v) in a.iter().enumerate() {
                    match v {
                        Value::Float(f) => out.push(*f),
                        Value::Integer(i) => out.push(*i as f64),
                        _ => {
                            let k = self.key(name);
                            self.errors
                                .push(format!("`{k}[{idx}]` must be a number"));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(_) => {
                let k = self.key(name);
                self.errors.push(format!("`{k}` must be an array of numbers"));
                None
            }
            None => {
                let k = self.key(name);
                self.errors.push(format!("missing key `{k}`"));
                None
            }
        }
    }

    fn f64_array_opt(&mut self, name: &str) -> Option<Vec<f64>> {
        if self.table.contains_key(name) {
            self.f64_array(name)
        } else {
            self.seen.push(name.to_string());
            None
        }
    }

    fn string_array(&mut self, name: &str) -> Option<Vec<String>> {
        match self.get(name) {
            Some(Value::Array(a)) => {
                let mut out = Vec::with_capacity(a.len());
                for (idx, v) in a.iter().enumerate() {
                    match v {
                        Value::String(s) => out.push(s.clone()),
                        _ => {
                            let k = self.key(name);
                            self.errors
                                .push(format!("`{k}[{idx}]` must be a string"));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(_) => {
                let k = self.key(name);
                self.errors.push(format!("`{k}` must be an array of strings"));
                None
            }
            None => {
                let k = self.key(name);
                self.errors.push(format!("missing key `{k}`"));
                None
            }
        }
    }

    /// Any key not consumed is a hard error: no silent typo acceptance.
    fn finish(mut self) -> Vec<String> {
        for key in self.table.keys() {
            if !self.seen.iter().any(|s| s == key) {
                let k = self.key(key);
                self.errors.push(format!("unknown key `{k}`"));
            }
        }
        self.errors
    }
}

fn subtable<'a>(
    root: &'a toml::Table,
    name: &str,
    errors: &mut Vec<String>,
) -> Option<&'a toml::Table> {
    match root.get(name) {
        Some(Value::Table(t)) => Some(t),
        Some(_) => {
            errors.push(format!("`{name}` must be a table"));
            None
        }
        None => {
            errors.push(format!("missing block `[{name}]`"));
            None
        }
    }
}

fn subtable_opt<'a>(
    root: &'a toml::Table,
    name: &str,
    errors: &mut Vec<String>,
) -> Option<&'a toml::Table> {
    match root.get(name) {
        Some(Value::Table(t)) => Some(t),
        Some(_) => {
            errors.push(format!("`{name}` must be a table"));
            None
        }
        None => None,
    }
}

impl RunConfig {
    /// Parse and fully validate; every violation is reported at once.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let root: toml::Table = text
            .parse()
            .map_err(|e| Error::Config(vec![format!("TOML parse error: {e}")]))?;
        let mut errors: Vec<String> = Vec::new();
        let known_blocks = [
            "species",
            "validity",
            "thermo",
            "friction",
            "grid",
            "ic",
            "time",
            "sources",
            "outputs",
            "diagnostics",
            "sweep",
        ];
        for key in root.keys() {
            if !known_blocks.contains(&key.as_str()) {
                errors.push(format!("unknown block `[{key}]`"));
            }
        }

        let species = subtable(&root, "species", &mut errors).map(|t| {
            let mut r = Reader::new(t, "species");
            let n = r.usize_field("n").unwrap_or(0);
            let rr = r.f64_array("R").unwrap_or_default();
            let c = r.f64_array("c").unwrap_or_default();
            errors.extend(r.finish());
            SpeciesBlock { n, r: rr, c }
        });
        let validity = subtable(&root, "validity", &mut errors).map(|t| {
            let mut r = Reader::new(t, "validity");
            let gamma = r.f64("gamma").unwrap_or(f64::NAN);
            let m = r.f64("M").unwrap_or(f64::NAN);
            errors.extend(r.finish());
            ValidityBlock { gamma, m }
        });
        let thermo = subtable(&root, "thermo", &mut errors).map(|t| {
            let mut r = Reader::new(t, "thermo");
            let rho_floor = r.f64_or("rho_floor", 1e-12);
            errors.extend(r.finish());
            ThermoBlock { rho_floor }
        });
        let friction = subtable(&root, "friction", &mut errors).map(|t| {
            let mut r = Reader::new(t, "friction");
            let b = r.f64_array("b").unwrap_or_default();
            let epsilon = if t.contains_key("epsilon") {
                r.f64("epsilon")
            } else {
                r.seen.push("epsilon".into());
                None
            };
            let epsilon_sweep = r.f64_array_opt("epsilon_sweep");
            errors.extend(r.finish());
            FrictionBlock {
                b,
                epsilon,
                epsilon_sweep,
            }
        });
        let grid = subtable(&root, "grid", &mut errors).map(|t| {
            let mut r = Reader::new(t, "grid");
            let ncells = r.usize_field("ncells").unwrap_or(0);
            let length = r.f64("length").unwrap_or(f64::NAN);
            errors.extend(r.finish());
            GridBlock { ncells, length }
        });
        let ic = subtable(&root, "ic", &mut errors).and_then(|t| {
            let mut r = Reader::new(t, "ic");
            let preset_name = r.string("preset").unwrap_or_default();
            let well_prepared = r.bool_or("well_prepared", true);
            let dv = r.f64_array_opt("dv");
            let preset = match preset_name.as_str() {
                "uniform" => Some(IcPreset::Uniform {
                    rho: r.f64_array("rho").unwrap_or_default(),
                    v: r.f64_or("v", 0.0),
                    theta: r.f64("theta").unwrap_or(f64::NAN),
                }),
                "gaussian_bump" => Some(IcPreset::GaussianBump {
                    base_rho: r.f64_array("base_rho").unwrap_or_default(),
                    amp_rho: r.f64_array("amp_rho").unwrap_or_default(),
                    center: r.f64("center").unwrap_or(f64::NAN),
                    width: r.f64("width").unwrap_or(f64::NAN),
                    base_v: r.f64_or("base_v", 0.0),
                    amp_v: r.f64_or("amp_v", 0.0),
                    base_theta: r.f64("base_theta").unwrap_or(f64::NAN),
                    amp_theta: r.f64_or("amp_theta", 0.0),
                }),
                "two_state" => Some(IcPreset::TwoState {
                    rho_left: r.f64_array("rho_left").unwrap_or_default(),
                    rho_right: r.f64_array("rho_right").unwrap_or_default(),
                    v_left: r.f64_or("v_left", 0.0),
                    v_right: r.f64_or("v_right", 0.0),
                    theta_left: r.f64("theta_left").unwrap_or(f64::NAN),
                    theta_right: r.f64("theta_right").unwrap_or(f64::NAN),
                    transition_width: r.f64_or("transition_width", 0.0),
                }),
                other => {
                    r.errors.push(format!(
                        "`ic.preset` must be one of uniform | gaussian_bump | two_state, got `{other}`"
                    ));
                    None
                }
            };
            errors.extend(r.finish());
            preset.map(|preset| IcBlock {
                preset,
                well_prepared,
                dv,
            })
        });
        let time = subtable(&root, "time", &mut errors).map(|t| {
            let mut r = Reader::new(t, "time");
            let t_end = r.f64("t_end").unwrap_or(f64::NAN);
            let cfl_number = r.f64("cfl_number").unwrap_or(f64::NAN);
            let snapshot_interval = r.f64("snapshot_interval").unwrap_or(f64::NAN);
            errors.extend(r.finish());
            TimeBlock {
                t_end,
                cfl_number,
                snapshot_interval,
            }
        });
        let sources = subtable(&root, "sources", &mut errors).map(|t| {
            let mut r = Reader::new(t, "sources");
            let kappa = r.f64("kappa").unwrap_or(f64::NAN);
            errors.extend(r.finish());
            SourcesBlock { kappa }
        });
        let outputs = subtable(&root, "outputs", &mut errors).map(|t| {
            let mut r = Reader::new(t, "outputs");
            let directory = r.string("directory").unwrap_or_default();
            let formats = r.string_array("formats").unwrap_or_default();
            errors.extend(r.finish());
            OutputsBlock { directory, formats }
        });
        let diagnostics = match subtable_opt(&root, "diagnostics", &mut errors) {
            Some(t) => {
                let mut r = Reader::new(t, "diagnostics");
                let coercivity_c = r.f64_or("coercivity_c", 0.0);
                errors.extend(r.finish());
                DiagnosticsBlock { coercivity_c }
            }
            None => DiagnosticsBlock { coercivity_c: 0.0 },
        };
        let sweep = match subtable_opt(&root, "sweep", &mut errors) {
            Some(t) => {
                let mut r = Reader::new(t, "sweep");
                let slope_threshold = r.f64_or("slope_threshold", 0.8);
                let workers = r.usize_or("workers", 1);
                errors.extend(r.finish());
                SweepBlock {
                    slope_threshold,
                    workers,
                }
            }
            None => SweepBlock {
                slope_threshold: 0.8,
                workers: 1,
            },
        };

        let (species, validity, thermo, friction, grid, ic, time, sources, outputs) = match (
            species, validity, thermo, friction, grid, ic, time, sources, outputs,
        ) {
            (
                Some(species),
                Some(validity),
                Some(thermo),
                Some(friction),
                Some(grid),
                Some(ic),
                Some(time),
                Some(sources),
                Some(outputs),
            ) if errors.is_empty() => (
                species, validity, thermo, friction, grid, ic, time, sources, outputs,
            ),
            _ => return Err(Error::Config(errors)),
        };

        let config = RunConfig {
            species,
            validity,
            thermo,
            friction,
            grid,
            ic,
            time,
            sources,
            outputs,
            diagnostics,
            sweep,
        };
        let violations = config.validate();
        if violations.is_empty() {
            Ok(config)
        } else {
            Err(Error::Config(violations))
        }
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Semantic validation; returns every violation.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let n = self.species.n;
        if n == 0 {
            errs.push("`species.n` must be at least 1".into());
        }
        if self.species.r.len() != n {
            errs.push(format!(
                "`species.R` must have n = {n} entries, got {}",
                self.species.r.len()
            ));
        }
        if self.species.c.len() != n {
            errs.push(format!(
                "`species.c` must have n = {n} entries, got {}",
                self.species.c.len()
            ));
        }
        if self.species.r.iter().any(|&x| !(x > 0.0)) {
            errs.push("`species.R` entries must be positive".into());
        }
        if self.species.c.iter().any(|&x| !(x > 0.0)) {
            errs.push("`species.c` entries must be positive".into());
        }
        if !(self.validity.gamma > 0.0 && self.validity.gamma < self.validity.m) {
            errs.push(format!(
                "`validity` needs 0 < gamma < M, got gamma = {}, M = {}",
                self.validity.gamma, self.validity.m
            ));
        }
        if !(self.thermo.rho_floor > 0.0) {
            errs.push("`thermo.rho_floor` must be positive".into());
        }
        let expected_b = n * n.saturating_sub(1) / 2;
        if self.friction.b.len() != expected_b {
            errs.push(format!(
                "`friction.b` must hold the strict upper triangle ({expected_b} entries for n = {n}), got {}",
                self.friction.b.len()
            ));
        }
        if self.friction.b.iter().any(|&x| !(x > 0.0)) {
            errs.push("`friction.b` entries must be positive".into());
        }
        match (&self.friction.epsilon, &self.friction.epsilon_sweep) {
            (Some(e), None) => {
                if !(*e > 0.0) {
                    errs.push("`friction.epsilon` must be positive".into());
                }
            }
            (None, Some(sweep)) => {
                if sweep.iter().any(|&x| !(x > 0.0)) {
                    errs.push("`friction.epsilon_sweep` entries must be positive".into());
                }
            }
            (Some(_), Some(_)) => {
                errs.push(
                    "set exactly one of `friction.epsilon` and `friction.epsilon_sweep`".into(),
                );
            }
            (None, None) => {
                errs.push("one of `friction.epsilon` or `friction.epsilon_sweep` is required".into());
            }
        }
        if self.grid.ncells < 4 {
            errs.push("`grid.ncells` must be at least 4".into());
        }
        if !(self.grid.length > 0.0) {
            errs.push("`grid.length` must be positive".into());
        }
        match &self.ic.preset {
            IcPreset::Uniform { rho, theta, .. } => {
                if rho.len() != n {
                    errs.push(format!("`ic.rho` must have n = {n} entries"));
                }
                if rho.iter().any(|&x| !(x > 0.0)) {
                    errs.push("`ic.rho` entries must be positive".into());
                }
                if !(*theta > 0.0) {
                    errs.push("`ic.theta` must be positive".into());
                }
            }
            IcPreset::GaussianBump {
                base_rho,
                amp_rho,
                width,
                base_theta,
                amp_theta,
                ..
            } => {
                if base_rho.len() != n || amp_rho.len() != n {
                    errs.push(format!(
                        "`ic.base_rho` and `ic.amp_rho` must have n = {n} entries"
                    ));
                }
                if !(*width > 0.0) {
                    errs.push("`ic.width` must be positive".into());
                }
                for (b, a) in base_rho.iter().zip(amp_rho.iter()) {
                    if !(b - a.abs() > 0.0) {
                        errs.push(format!(
                            "`ic` density may touch zero: base {b} with amplitude {a}"
                        ));
                        break;
                    }
                }
                if !(base_theta - amp_theta.abs() > 0.0) {
                    errs.push("`ic` temperature may touch zero".into());
                }
            }
            IcPreset::TwoState {
                rho_left,
                rho_right,
                theta_left,
                theta_right,
                transition_width,
                ..
            } => {
                if rho_left.len() != n || rho_right.len() != n {
                    errs.push(format!(
                        "`ic.rho_left` and `ic.rho_right` must have n = {n} entries"
                    ));
                }
                if rho_left
                    .iter()
                    .chain(rho_right.iter())
                    .any(|&x| !(x > 0.0))
                {
                    errs.push("`ic` densities must be positive".into());
                }
                if !(*theta_left > 0.0 && *theta_right > 0.0) {
                    errs.push("`ic` temperatures must be positive".into());
                }
                if *transition_width < 0.0 {
                    errs.push("`ic.transition_width` must be nonnegative".into());
                }
            }
        }
        if let Some(dv) = &self.ic.dv {
            if dv.len() != n {
                errs.push(format!("`ic.dv` must have n = {n} entries"));
            }
        }
        if !(self.time.t_end > 0.0) {
            errs.push("`time.t_end` must be positive".into());
        }
        if !(self.time.cfl_number > 0.0 && self.time.cfl_number <= 1.0) {
            errs.push("`time.cfl_number` must lie in (0, 1]".into());
        }
        if !(self.time.snapshot_interval > 0.0) {
            errs.push("`time.snapshot_interval` must be positive".into());
        }
        if !(self.sources.kappa > 0.0) {
            errs.push("`sources.kappa` must be positive".into());
        }
        if self.outputs.directory.is_empty() {
            errs.push("`outputs.directory` must not be empty".into());
        }
        if self.outputs.formats.is_empty() {
            errs.push("`outputs.formats` must not be empty".into());
        }
        for f in &self.outputs.formats {
            if f != "csv" && f != "dat" {
                errs.push(format!("`outputs.formats` entries must be csv | dat, got `{f}`"));
            }
        }
        if !(self.sweep.slope_threshold > 0.0) {
            errs.push("`sweep.slope_threshold` must be positive".into());
        }
        if self.sweep.workers == 0 {
            errs.push("`sweep.workers` must be at least 1".into());
        }
        if !(self.diagnostics.coercivity_c >= 0.0) {
            errs.push("`diagnostics.coercivity_c` must be nonnegative".into());
        }
        errs
    }

    /// Serialize the effective configuration back to TOML.
    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn thermo_model(&self) -> Result<ThermoModel> {
        ThermoModel::new(
            self.species.r.clone(),
            self.species.c.clone(),
            ValidityDomain::new(self.validity.gamma, self.validity.m)?,
            self.thermo.rho_floor,
        )
    }

    pub fn build_grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.ncells, self.grid.length)
    }

    /// Friction matrix carrying the single configured epsilon.
    pub fn friction_single(&self) -> Result<FrictionMatrix> {
        let eps = self.friction.epsilon.ok_or_else(|| {
            Error::InvalidArgument(
                "this command needs a single `friction.epsilon` (not a sweep)".into(),
            )
        })?;
        FrictionMatrix::from_upper_triangle(self.species.n, &self.friction.b, eps)
    }

    pub fn friction_with(&self, epsilon: f64) -> Result<FrictionMatrix> {
        FrictionMatrix::from_upper_triangle(self.species.n, &self.friction.b, epsilon)
    }

    pub fn source_config(&self) -> Result<SourceConfig> {
        SourceConfig::zero(self.sources.kappa)
    }

    /// Class-I primitive profiles (rho_i(x), v(x), theta(x)) on the grid.
    pub fn initial_profiles(&self, grid: &Grid1D) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let n = self.species.n;
        let nc = grid.ncells();
        let length = grid.length();
        let mut rho = vec![vec![0.0; nc]; n];
        let mut v = vec![0.0; nc];
        let mut theta = vec![0.0; nc];
        for j in 0..nc {
            let x = grid.center(j);
            match &self.ic.preset {
                IcPreset::Uniform {
                    rho: r0,
                    v: v0,
                    theta: th0,
                } => {
                    for i in 0..n {
                        rho[i][j] = r0[i];
                    }
                    v[j] = *v0;
                    theta[j] = *th0;
                }
                IcPreset::GaussianBump {
                    base_rho,
                    amp_rho,
                    center,
                    width,
                    base_v,
                    amp_v,
                    base_theta,
                    amp_theta,
                } => {
                    let s = (std::f64::consts::PI * (x - center) / length).sin();
                    let bump = (-s * s / (width * width)).exp();
                    for i in 0..n {
                        rho[i][j] = base_rho[i] + amp_rho[i] * bump;
                    }
                    v[j] = base_v + amp_v * bump;
                    theta[j] = base_theta + amp_theta * bump;
                }
                IcPreset::TwoState {
                    rho_left,
                    rho_right,
                    v_left,
                    v_right,
                    theta_left,
                    theta_right,
                    transition_width,
                } => {
                    let a = 0.25 * length;
                    let b = 0.75 * length;
                    let s = if *transition_width > 0.0 {
                        0.5 * (((x - a) / transition_width).tanh()
                            - ((x - b) / transition_width).tanh())
                    } else if x > a && x < b {
                        1.0
                    } else {
                        0.0
                    };
                    for i in 0..n {
                        rho[i][j] = rho_left[i] + (rho_right[i] - rho_left[i]) * s;
                    }
                    v[j] = v_left + (v_right - v_left) * s;
                    theta[j] = theta_left + (theta_right - theta_left) * s;
                }
            }
        }
        (rho, v, theta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE: &str = r#"
[species]
n = 2
R = [1.0, 1.5]
c = [2.0, 1.25]

[validity]
gamma = 1e-3
M = 1e3

[thermo]
rho_floor = 1e-12

[friction]
b = [0.8]
epsilon = 1e-2

[grid]
ncells = 64
length = 1.0

[ic]
preset = "gaussian_bump"
well_prepared = true
base_rho = [1.0, 1.5]
amp_rho = [0.1, -0.05]
center = 0.5
width = 0.25
base_v = 0.0
amp_v = 0.05
base_theta = 1.0
amp_theta = 0.05

[time]
t_end = 0.2
cfl_number = 0.4
snapshot_interval = 0.1

[sources]
kappa = 0.01

[outputs]
directory = "out"
formats = ["csv"]
"#;

    #[test]
    fn parses_valid_config() {
        let cfg = RunConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.species.n, 2);
        assert_eq!(cfg.sweep.workers, 1);
        assert!(cfg.friction.epsilon.is_some());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = EXAMPLE.replace("[sources]\nkappa = 0.01", "[sources]\nkappa = 0.01\nkapa = 2.0");
        let err = RunConfig::from_toml_str(&text).unwrap_err();
        match err {
            Error::Config(violations) => {
                assert!(violations.iter().any(|v| v.contains("unknown key `sources.kapa`")));
            }
            other => panic!("expected Config error, got {other:?}"),
        }
    }

    #[test]
    fn all_violations_reported_at_once() {
        let text = EXAMPLE
            .replace("ncells = 64", "ncells = 2")
            .replace("kappa = 0.01", "kappa = -1.0")
            .replace("cfl_number = 0.4", "cfl_number = 1.5");
        let err = RunConfig::from_toml_str(&text).unwrap_err();
        match err {
            Error::Config(violations) => {
                assert!(violations.len() >= 3, "violations: {violations:?}");
            }
            other => panic!("expected Config error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip_preserves_effective_config() {
        let cfg = RunConfig::from_toml_str(EXAMPLE).unwrap();
        let text = cfg.to_toml_string();
        let cfg2 = RunConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, cfg2);
    }

    #[test]
    fn epsilon_and_sweep_are_mutually_exclusive() {
        let text = EXAMPLE.replace(
            "epsilon = 1e-2",
            "epsilon = 1e-2\nepsilon_sweep = [1e-1, 1e-2, 1e-3]",
        );
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn uniform_profiles_are_flat() {
        let text = EXAMPLE.replace(
            r#"preset = "gaussian_bump"
well_prepared = true
base_rho = [1.0, 1.5]
amp_rho = [0.1, -0.05]
center = 0.5
width = 0.25
base_v = 0.0
amp_v = 0.05
base_theta = 1.0
amp_theta = 0.05"#,
            r#"preset = "uniform"
well_prepared = true
rho = [1.0, 2.0]
v = 0.3
theta = 1.1"#,
        );
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        let grid = cfg.build_grid().unwrap();
        let (rho, v, theta) = cfg.initial_profiles(&grid);
        assert!(rho[0].iter().all(|&x| x == 1.0));
        assert!(rho[1].iter().all(|&x| x == 2.0));
        assert!(v.iter().all(|&x| x == 0.3));
        assert!(theta.iter().all(|&x| x == 1.1));
    }
}
