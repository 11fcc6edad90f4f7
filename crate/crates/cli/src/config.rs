//! Line-oriented `section.key = value` run configuration.

use std::collections::BTreeMap;
use std::path::PathBuf;

use frontlab::discretize::SolverOptions;
use frontlab::media::{
    build_medium, Cell, DiffusionSpec, Medium, MediumConfig, PeriodicField, ReactionSpec, Sym2, TrigSeries,
};
use frontlab::pulsate::{InitialProfile, PulsateParams};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: `{key}` is already set on line {first}")]
    Duplicate { line: usize, key: String, first: usize },
    #[error("missing required key `{0}`")]
    Missing(String),
    #[error("`{key}`{}: {msg}", at_line(*.line))]
    Invalid { key: String, line: usize, msg: String },
}

fn at_line(line: usize) -> String {
    if line == 0 {
        " (default)".into()
    } else {
        format!(" (line {line})")
    }
}

enum Default {
    Value(&'static str),
    /// Needed only by some kinds; checked where it is read.
    Conditional,
    Required,
}

const KEYS: &[(&str, Default)] = &[
    ("medium.dim", Default::Required),
    ("medium.periods", Default::Conditional),
    ("medium.diffusion", Default::Value("constant")),
    ("medium.a11", Default::Conditional),
    ("medium.a22", Default::Conditional),
    ("medium.a12", Default::Conditional),
    ("medium.laminate_axis", Default::Conditional),
    ("medium.laminate_profile", Default::Conditional),
    ("medium.laminate_reciprocal", Default::Conditional),
    ("medium.reaction", Default::Required),
    ("medium.threshold", Default::Conditional),
    ("medium.coeffs", Default::Conditional),
    ("solver.cell_n", Default::Value("32")),
    ("solver.n_xi", Default::Value("512")),
    ("solver.half_width", Default::Value("auto")),
    ("solver.dtau", Default::Value("auto")),
    ("solver.kappa", Default::Value("0.5")),
    ("solver.tol", Default::Value("1e-8")),
    ("solver.window", Default::Value("100")),
    ("solver.max_steps", Default::Value("20000")),
    ("solver.initial", Default::Value("smoothed")),
    ("solver.linear_tol", Default::Value("1e-10")),
    ("solver.wave_n_xi", Default::Value("2048")),
    ("experiment.direction", Default::Conditional),
    ("experiment.l", Default::Value("1")),
    ("experiment.mu", Default::Value("0")),
    ("experiment.gamma0", Default::Value("0.01")),
    ("experiment.n_dirs", Default::Value("16")),
    ("experiment.ls", Default::Value("0.8, 0.4, 0.2, 0.1")),
    ("experiment.eps_fraction", Default::Value("0.5")),
    ("experiment.shift", Default::Conditional),
    ("experiment.strides", Default::Value("2, 1")),
    ("experiment.check_dt", Default::Value("0.25")),
    ("experiment.n_per_cell", Default::Value("32")),
    ("experiment.cells", Default::Value("60")),
    ("experiment.t_end", Default::Value("100")),
    ("experiment.dt", Default::Value("0.05")),
    ("output.results", Default::Value("results.csv")),
    ("output.profiles", Default::Value("false")),
    ("seed", Default::Value("0")),
];

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub cell_n: usize,
    pub pulsate: PulsateParams,
    pub linear: SolverOptions,
    pub wave_n_xi: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSection {
    /// Unit vector.
    pub direction: Vec<f64>,
    pub l: f64,
    pub mu: Vec<f64>,
    pub gamma0: f64,
    pub n_dirs: usize,
    pub ls: Vec<f64>,
    pub eps_fraction: Vec<f64>,
    pub shift: Vec<i64>,
    /// Finest last.
    pub strides: Vec<usize>,
    pub check_dt: f64,
    pub n_per_cell: usize,
    pub cells: usize,
    pub t_end: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSection {
    pub results: PathBuf,
    pub profiles: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub medium: Medium,
    /// Hex SHA-256 of the effective `medium.*` settings, 16 digits.
    pub medium_hash: String,
    pub solver: SolverSection,
    pub experiment: ExperimentSection,
    pub output: OutputSection,
    pub seed: u64,
    /// `key = value` for every key left at its default.
    pub defaulted: Vec<(String, String)>,
}

impl RunConfig {
    /// One line per defaulted key.
    pub fn banner(&self) -> String {
        self.defaulted
            .iter()
            .map(|(k, v)| format!("default {k} = {v}\n"))
            .collect()
    }
}

struct Entries {
    given: BTreeMap<String, (String, usize)>,
    defaulted: Vec<(String, String)>,
}

impl Entries {
    fn raw(&mut self, key: &str) -> Option<(String, usize)> {
        if let Some((v, line)) = self.given.get(key) {
            return Some((v.clone(), *line));
        }
        let spec = KEYS.iter().find(|(k, _)| *k == key).map(|(_, d)| d);
        match spec {
            Some(Default::Value(v)) => {
                self.defaulted.push((key.to_string(), v.to_string()));
                Some((v.to_string(), 0))
            }
            _ => None,
        }
    }

    fn with_default(&mut self, key: &str, default: &str) -> (String, usize) {
        self.raw(key).unwrap_or_else(|| {
            self.defaulted.push((key.to_string(), default.to_string()));
            (default.to_string(), 0)
        })
    }

    fn required(&mut self, key: &str) -> Result<(String, usize), ConfigError> {
        self.raw(key).ok_or_else(|| ConfigError::Missing(key.into()))
    }

    fn reject(&self, key: &str, why: &str) -> Result<(), ConfigError> {
        match self.given.get(key) {
            Some((_, line)) => Err(ConfigError::Invalid {
                key: key.into(),
                line: *line,
                msg: format!("not used {why}"),
            }),
            None => Ok(()),
        }
    }
}

fn invalid(key: &str, line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        line,
        msg: msg.into(),
    }
}

fn parse<T: std::str::FromStr>(key: &str, (v, line): &(String, usize)) -> Result<T, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| invalid(key, *line, format!("cannot parse `{v}`")))
}

fn list<T: std::str::FromStr>(key: &str, (v, line): &(String, usize)) -> Result<Vec<T>, ConfigError> {
    v.split(',')
        .map(|s| parse(key, &(s.trim().to_string(), *line)))
        .collect()
}

fn positive(key: &str, (v, line): &(String, usize)) -> Result<f64, ConfigError> {
    let x: f64 = parse(key, &(v.clone(), *line))?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(key, *line, format!("{x} must be positive")));
    }
    Ok(x)
}

fn count(key: &str, entry: &(String, usize), min: usize) -> Result<usize, ConfigError> {
    let v: i64 = parse(key, entry)?;
    if v < min as i64 {
        return Err(invalid(key, entry.1, format!("{v} is below {min}")));
    }
    Ok(v as usize)
}

fn auto(key: &str, entry: &(String, usize)) -> Result<Option<f64>, ConfigError> {
    if entry.0.trim() == "auto" {
        Ok(None)
    } else {
        positive(key, entry).map(Some)
    }
}

fn series(key: &str, (v, line): &(String, usize)) -> Result<TrigSeries, ConfigError> {
    v.parse().map_err(|e| invalid(key, *line, format!("{e}")))
}

fn flag(key: &str, (v, line): &(String, usize)) -> Result<bool, ConfigError> {
    match v.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(invalid(key, *line, format!("expected true or false, got `{v}`"))),
    }
}

fn lines(text: &str) -> Result<BTreeMap<String, (String, usize)>, ConfigError> {
    let mut given: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            msg: format!("expected `key = value`, got `{body}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                msg: "empty key or value".into(),
            });
        }
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.into(),
            });
        }
        if let Some((_, first)) = given.get(key) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.into(),
                first: *first,
            });
        }
        given.insert(key.to_string(), (value.to_string(), line));
    }
    Ok(given)
}

fn medium_section(en: &mut Entries) -> Result<(MediumConfig, Vec<String>), ConfigError> {
    // effective medium settings, in table order, for the hash
    let mut canon = Vec::new();
    let dim_entry = en.required("medium.dim")?;
    let dim = count("medium.dim", &dim_entry, 1)?;
    if dim > 2 {
        return Err(invalid("medium.dim", dim_entry.1, "must be 1 or 2"));
    }
    canon.push(format!("dim={dim}"));
    let ones = vec!["1"; dim].join(", ");
    let pe = en.with_default("medium.periods", &ones);
    let periods: Vec<f64> = list("medium.periods", &pe)?;
    if periods.len() != dim {
        return Err(invalid("medium.periods", pe.1, format!("expected {dim} values")));
    }
    let cell = Cell::new(periods.clone()).map_err(|e| invalid("medium.periods", pe.1, e.to_string()))?;
    canon.push(format!("periods={periods:?}"));

    let kind = en.with_default("medium.diffusion", "constant");
    let diffusion = match kind.0.as_str() {
        "constant" => {
            for k in ["medium.laminate_axis", "medium.laminate_profile", "medium.laminate_reciprocal"] {
                en.reject(k, "with constant diffusion")?;
            }
            let a11 = parse::<f64>("medium.a11", &en.with_default("medium.a11", "1"))?;
            let a22 = parse::<f64>("medium.a22", &en.with_default("medium.a22", "1"))?;
            let a12 = parse::<f64>("medium.a12", &en.with_default("medium.a12", "0"))?;
            canon.push(format!("constant={a11:?},{a22:?},{a12:?}"));
            DiffusionSpec::Constant(Sym2 {
                xx: a11,
                yy: a22,
                xy: a12,
            })
        }
        "laminate" => {
            for k in ["medium.a11", "medium.a22", "medium.a12"] {
                en.reject(k, "with laminate diffusion")?;
            }
            let ax = en.with_default("medium.laminate_axis", "1");
            let axis = count("medium.laminate_axis", &ax, 1)?;
            if axis > dim {
                return Err(invalid("medium.laminate_axis", ax.1, format!("must be at most {dim}")));
            }
            let pr = en.required("medium.laminate_profile")?;
            let profile = series("medium.laminate_profile", &pr)?;
            let recip = flag(
                "medium.laminate_reciprocal",
                &en.with_default("medium.laminate_reciprocal", "false"),
            )?;
            canon.push(format!("laminate={axis},{profile},{recip}"));
            DiffusionSpec::Laminate {
                axis: axis - 1,
                profile: if recip {
                    PeriodicField::reciprocal_of(profile)
                } else {
                    profile.into()
                },
            }
        }
        "trigonometric" => {
            for k in ["medium.laminate_axis", "medium.laminate_profile", "medium.laminate_reciprocal"] {
                en.reject(k, "with trigonometric diffusion")?;
            }
            let a11 = series("medium.a11", &en.with_default("medium.a11", "1"))?;
            let a22 = series("medium.a22", &en.with_default("medium.a22", "1"))?;
            let a12 = series("medium.a12", &en.with_default("medium.a12", "0"))?;
            canon.push(format!("trigonometric={a11};{a22};{a12}"));
            DiffusionSpec::Trigonometric {
                a11: a11.into(),
                a22: a22.into(),
                a12: a12.into(),
            }
        }
        other => {
            return Err(invalid(
                "medium.diffusion",
                kind.1,
                format!("unknown kind `{other}` (constant, laminate, trigonometric)"),
            ))
        }
    };

    let kind = en.required("medium.reaction")?;
    let reaction = match kind.0.as_str() {
        "cubic" => {
            en.reject("medium.coeffs", "with a cubic reaction")?;
            let a = series("medium.threshold", &en.required("medium.threshold")?)?;
            canon.push(format!("cubic={a}"));
            ReactionSpec::Cubic { a: a.into() }
        }
        "quintic" => {
            en.reject("medium.coeffs", "with the quintic reaction")?;
            en.reject("medium.threshold", "with the quintic reaction")?;
            canon.push("quintic".into());
            ReactionSpec::Quintic
        }
        "polynomial" => {
            en.reject("medium.threshold", "with a polynomial reaction")?;
            let (v, line) = en.required("medium.coeffs")?;
            let coeffs = v
                .split(';')
                .map(|s| series("medium.coeffs", &(s.trim().to_string(), line)))
                .collect::<Result<Vec<_>, _>>()?;
            canon.push(format!(
                "polynomial={}",
                coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
            ));
            ReactionSpec::Polynomial {
                coeffs: coeffs.into_iter().map(Into::into).collect(),
            }
        }
        other => {
            return Err(invalid(
                "medium.reaction",
                kind.1,
                format!("unknown kind `{other}` (cubic, quintic, polynomial)"),
            ))
        }
    };
    Ok((
        MediumConfig {
            cell,
            diffusion,
            reaction,
        },
        canon,
    ))
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut en = Entries {
        given: lines(text)?,
        defaulted: Vec::new(),
    };
    let (mc, canon) = medium_section(&mut en)?;
    let dim = mc.cell.dim();
    let medium = build_medium(&mc).map_err(|e| invalid("medium", 0, e.to_string()))?;
    let digest = Sha256::digest(canon.join("\n").as_bytes());
    let medium_hash: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();

    let linear_tol = positive("solver.linear_tol", &en.raw("solver.linear_tol").unwrap())?;
    let linear = SolverOptions {
        cg_tol: linear_tol,
        eigen_tol: linear_tol,
        ..SolverOptions::default()
    };
    let initial = en.raw("solver.initial").unwrap();
    let initial = match initial.0.as_str() {
        "smoothed" => InitialProfile::Smoothed,
        "step" => InitialProfile::Step,
        other => {
            return Err(invalid(
                "solver.initial",
                initial.1,
                format!("expected smoothed or step, got `{other}`"),
            ))
        }
    };
    let kappa_entry = en.raw("solver.kappa").unwrap();
    let kappa = positive("solver.kappa", &kappa_entry)?;
    if kappa > 1.0 {
        return Err(invalid("solver.kappa", kappa_entry.1, "must be at most 1"));
    }
    let pulsate = PulsateParams {
        n_xi: count("solver.n_xi", &en.raw("solver.n_xi").unwrap(), 16)?,
        half_width: auto("solver.half_width", &en.raw("solver.half_width").unwrap())?,
        dtau: auto("solver.dtau", &en.raw("solver.dtau").unwrap())?,
        kappa,
        tol: positive("solver.tol", &en.raw("solver.tol").unwrap())?,
        window: count("solver.window", &en.raw("solver.window").unwrap(), 1)?,
        max_steps: count("solver.max_steps", &en.raw("solver.max_steps").unwrap(), 1)?,
        initial,
        linear: linear.clone(),
        ..PulsateParams::default()
    };
    let solver = SolverSection {
        cell_n: count("solver.cell_n", &en.raw("solver.cell_n").unwrap(), 4)?,
        pulsate,
        linear,
        wave_n_xi: count("solver.wave_n_xi", &en.raw("solver.wave_n_xi").unwrap(), 16)?,
    };

    let e1 = if dim == 1 { "1" } else { "1, 0" };
    let de = en.with_default("experiment.direction", e1);
    let direction: Vec<f64> = list("experiment.direction", &de)?;
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if direction.len() != dim || !(norm > 0.0 && norm.is_finite()) {
        return Err(invalid(
            "experiment.direction",
            de.1,
            format!("expected {dim} components, not all zero"),
        ));
    }
    let direction: Vec<f64> = direction.iter().map(|v| v / norm).collect();
    let zeros = vec!["0"; dim].join(", ");
    let sh = en.with_default("experiment.shift", &zeros);
    let shift: Vec<i64> = list("experiment.shift", &sh)?;
    if shift.len() != dim {
        return Err(invalid("experiment.shift", sh.1, format!("expected {dim} integers")));
    }
    let ls_entry = en.raw("experiment.ls").unwrap();
    let ls: Vec<f64> = list("experiment.ls", &ls_entry)?;
    if ls.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(invalid("experiment.ls", ls_entry.1, "every scale must be positive"));
    }
    let ef = en.raw("experiment.eps_fraction").unwrap();
    let eps_fraction: Vec<f64> = list("experiment.eps_fraction", &ef)?;
    if eps_fraction.iter().any(|f| !(0.0..=1.0).contains(f)) {
        return Err(invalid("experiment.eps_fraction", ef.1, "fractions of ε₀ must lie in [0, 1]"));
    }
    let st = en.raw("experiment.strides").unwrap();
    let strides: Vec<usize> = list("experiment.strides", &st)?;
    if strides.is_empty() || strides.contains(&0) {
        return Err(invalid("experiment.strides", st.1, "strides must be positive"));
    }
    let g0 = en.raw("experiment.gamma0").unwrap();
    let gamma0: f64 = parse("experiment.gamma0", &g0)?;
    if !(gamma0 >= 0.0) {
        return Err(invalid("experiment.gamma0", g0.1, "must be nonnegative"));
    }
    let experiment = ExperimentSection {
        direction,
        l: positive("experiment.l", &en.raw("experiment.l").unwrap())?,
        mu: list("experiment.mu", &en.raw("experiment.mu").unwrap())?,
        gamma0,
        n_dirs: count("experiment.n_dirs", &en.raw("experiment.n_dirs").unwrap(), 8)?,
        ls,
        eps_fraction,
        shift,
        strides,
        check_dt: positive("experiment.check_dt", &en.raw("experiment.check_dt").unwrap())?,
        n_per_cell: count("experiment.n_per_cell", &en.raw("experiment.n_per_cell").unwrap(), 4)?,
        cells: count("experiment.cells", &en.raw("experiment.cells").unwrap(), 6)?,
        t_end: positive("experiment.t_end", &en.raw("experiment.t_end").unwrap())?,
        dt: positive("experiment.dt", &en.raw("experiment.dt").unwrap())?,
    };
    let output = OutputSection {
        results: PathBuf::from(en.raw("output.results").unwrap().0),
        profiles: flag("output.profiles", &en.raw("output.profiles").unwrap())?,
    };
    let seed = parse("seed", &en.raw("seed").unwrap())?;
    Ok(RunConfig {
        medium,
        medium_hash,
        solver,
        experiment,
        output,
        seed,
        defaulted: en.defaulted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBIC: &str = "medium.dim = 1\nmedium.reaction = cubic\nmedium.threshold = 0.3\n";

    #[test]
    fn minimal_cubic_fills_defaults() {
        let c = parse_config(CUBIC).unwrap();
        assert_eq!(c.medium.alpha1(), 1.0);
        assert_eq!(c.solver.pulsate.n_xi, 512);
        assert_eq!(c.experiment.direction, vec![1.0]);
        assert!(c.banner().contains("default solver.n_xi = 512"));
        assert!(!c.banner().contains("medium.threshold"));
    }

    #[test]
    fn quintic_needs_no_parameters() {
        let c = parse_config("medium.dim = 1\nmedium.reaction = quintic # five zeros\n").unwrap();
        assert_eq!(c.medium.reaction_spec(), &ReactionSpec::Quintic);
        let err = parse_config("medium.dim = 1\nmedium.reaction = quintic\nmedium.threshold = 0.3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { line: 3, .. }));
    }

    #[test]
    fn negative_grid_size_names_the_key() {
        let err = parse_config(&format!("{CUBIC}solver.cell_n = -4\n")).unwrap_err();
        assert!(err.to_string().contains("solver.cell_n") && err.to_string().contains("line 4"), "{err}");
    }

    #[test]
    fn syntax_and_unknown_keys_report_lines() {
        let err = parse_config(&format!("{CUBIC}\n# comment\nsolver.n_xi 12\n")).unwrap_err();
        assert_eq!(
            err,
            ConfigError::Syntax {
                line: 6,
                msg: "expected `key = value`, got `solver.n_xi 12`".into()
            }
        );
        let err = parse_config(&format!("{CUBIC}solver.nxi = 12\n")).unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 4,
                key: "solver.nxi".into()
            }
        );
        let err = parse_config(&format!("{CUBIC}medium.dim = 2\n")).unwrap_err();
        assert!(matches!(err, ConfigError::Duplicate { line: 4, first: 1, .. }));
    }

    #[test]
    fn missing_keys_are_named() {
        assert_eq!(
            parse_config("medium.dim = 1\nmedium.reaction = cubic\n").unwrap_err(),
            ConfigError::Missing("medium.threshold".into())
        );
        assert_eq!(
            parse_config("medium.reaction = quintic\n").unwrap_err(),
            ConfigError::Missing("medium.dim".into())
        );
    }

    #[test]
    fn laminate_and_direction_are_parsed() {
        let text = "medium.dim = 2\nmedium.diffusion = laminate\nmedium.laminate_profile = 2, 1*cos1(1)\n\
                    medium.reaction = cubic\nmedium.threshold = 0.3, 0.1*cos1(1)*cos2(1)\n\
                    experiment.direction = 3, 4\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.medium.alpha1(), 1.0);
        assert!((c.experiment.direction[0] - 0.6).abs() < 1e-15);
        assert_eq!(c.experiment.shift, vec![0, 0]);
    }

    #[test]
    fn hash_follows_the_medium_only() {
        let a = parse_config(CUBIC).unwrap();
        let b = parse_config(&format!("{CUBIC}solver.n_xi = 256\n")).unwrap();
        let c = parse_config("medium.dim = 1\nmedium.reaction = cubic\nmedium.threshold = 0.35\n").unwrap();
        assert_eq!(a.medium_hash, b.medium_hash);
        assert_ne!(a.medium_hash, c.medium_hash);
        assert_eq!(a.medium_hash.len(), 16);
    }

    #[test]
    fn non_elliptic_medium_is_a_config_error() {
        let text = "medium.dim = 1\nmedium.a11 = -1\nmedium.reaction = quintic\n";
        assert!(matches!(parse_config(text).unwrap_err(), ConfigError::Invalid { .. }));
    }
}
