//! Plain-text scenario configuration.
//!
//! One `key = value` per line; `#` starts a comment. Keys:
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `scenario` | `laplacian_power`, `heat_weight` or `custom` | required |
//! | `N` | mode cutoff in `[8, 512]` | `128` |
//! | `p` | Laplacian power in `[1, 4]` (`laplacian_power` only) | `1` |
//! | `s` | heat parameter `> 0` (`heat_weight` only) | required |
//! | `q0` | `identity`, `laplacian_power(p)` or `heat(s)` (`custom` only) | required |
//! | `inertia` | `base, bump, width` of the diagonal inertia | none |
//! | `initial` | `identity`, `paper_62(n)`, `trig(l)`, `smoothing({n:c, ...})`, `random(amplitude)`, `file:PATH` | `identity` |
//! | `integrator` | `rk4` or `implicit_midpoint` | `rk4` |
//! | `h` | time step, `0 < h <= T` | `0.001` |
//! | `T` | horizon | `1` |
//! | `stride` | steps between diagnostic samples | `50` |
//! | `xi` | comma-separated complex numbers | `0, 1, i` |
//! | `k` | comma-separated integral orders in `[1, 8]` | `1, 2, 3, 4` |
//! | `step_tolerance` | step-doubling rejection threshold | none |
//! | `track_spectrum` | `true` or `false` | `true` |
//! | `snapshots` | write a state file per sample | `false` |
//! | `csv` | trajectory file name | `trajectory.csv` |
//! | `manifest` | manifest file name | `manifest.json` |
//!
//! For the heat twist `s·N²` must stay below the exponent guard of the
//! conjugation `Q₀ X Q₀⁻¹`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64 as C64;
use rigid_psido::dynamics::Integrator;
use rigid_psido::pairing::OVERFLOW_GUARD;
use rigid_psido::spectral::{format_complex, parse_complex, parse_trig_poly};
use rigid_psido::{InertiaSpec, Q0Kind, TrigPoly, TwistSpec};

pub const MIN_CUTOFF: usize = 8;
pub const MAX_CUTOFF: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    LaplacianPower,
    HeatWeight,
    Custom,
}

impl ScenarioKind {
    fn name(self) -> &'static str {
        match self {
            Self::LaplacianPower => "laplacian_power",
            Self::HeatWeight => "heat_weight",
            Self::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Identity,
    /// `Id + M_{e^{inx}} e^{-Δ} M_{e^{-inx}}`.
    Paper62(i64),
    /// `Id + ½ M_{cos(lx)}`; not trace class, runs only uncertified.
    Trig(i64),
    /// `Id + M_a e^{-Δ} M_{conj a}`.
    Smoothing(TrigPoly),
    /// `Id + K` with `K` a seeded random smoothing kernel of the given amplitude.
    Random(f64),
    /// A snapshot file.
    File(PathBuf),
}

impl fmt::Display for InitialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => write!(f, "identity"),
            Self::Paper62(n) => write!(f, "paper_62({n})"),
            Self::Trig(l) => write!(f, "trig({l})"),
            Self::Smoothing(a) => write!(f, "smoothing({a})"),
            Self::Random(a) => write!(f, "random({a})"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub cutoff: usize,
    pub p: Option<i32>,
    pub s: Option<f64>,
    pub q0: Option<Q0Kind>,
    pub inertia: Option<InertiaSpec>,
    pub initial: InitialSpec,
    pub integrator: Integrator,
    pub step: f64,
    pub horizon: f64,
    pub stride: usize,
    pub xis: Vec<C64>,
    pub ks: Vec<u32>,
    pub step_tolerance: Option<f64>,
    pub track_spectrum: bool,
    pub snapshots: bool,
    pub csv: String,
    pub manifest: String,
}

/// One problem found while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

const KEYS: &[&str] = &[
    "scenario",
    "N",
    "p",
    "s",
    "q0",
    "inertia",
    "initial",
    "integrator",
    "h",
    "T",
    "stride",
    "xi",
    "k",
    "step_tolerance",
    "track_spectrum",
    "snapshots",
    "csv",
    "manifest",
];

fn parse_call<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.strip_prefix(name)?.trim().strip_prefix('(')?.strip_suffix(')').map(str::trim)
}

fn parse_initial(text: &str) -> Option<InitialSpec> {
    let t = text.trim();
    if t == "identity" {
        return Some(InitialSpec::Identity);
    }
    if let Some(path) = t.strip_prefix("file:") {
        let path = path.trim();
        return (!path.is_empty()).then(|| InitialSpec::File(PathBuf::from(path)));
    }
    if let Some(arg) = parse_call(t, "paper_62") {
        return arg.parse().ok().map(InitialSpec::Paper62);
    }
    if let Some(arg) = parse_call(t, "trig") {
        return arg.parse().ok().map(InitialSpec::Trig);
    }
    if let Some(arg) = parse_call(t, "smoothing") {
        return parse_trig_poly(arg).map(InitialSpec::Smoothing);
    }
    if let Some(arg) = parse_call(t, "random") {
        return arg.parse::<f64>().ok().filter(|a| a.is_finite()).map(InitialSpec::Random);
    }
    None
}

fn parse_q0(text: &str) -> Option<Q0Kind> {
    let t = text.trim();
    if t == "identity" {
        return Some(Q0Kind::Identity);
    }
    if let Some(arg) = parse_call(t, "laplacian_power") {
        return arg.parse().ok().map(Q0Kind::LaplacianPower);
    }
    if let Some(arg) = parse_call(t, "heat") {
        return arg.parse().ok().map(Q0Kind::Heat);
    }
    None
}

fn format_q0(q: Q0Kind) -> String {
    match q {
        Q0Kind::Identity => "identity".into(),
        Q0Kind::LaplacianPower(p) => format!("laplacian_power({p})"),
        Q0Kind::Heat(s) => format!("heat({s})"),
    }
}

fn parse_bool(text: &str) -> Option<bool> {
    match text {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

fn split_list(text: &str) -> impl Iterator<Item = &str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl ScenarioConfig {
    /// The twist selected by `scenario`, `p`, `s`, `q0` and `inertia`.
    pub fn twist(&self) -> rigid_psido::Result<TwistSpec> {
        let q0 = match self.scenario {
            ScenarioKind::LaplacianPower => Q0Kind::LaplacianPower(self.p.unwrap_or(1)),
            ScenarioKind::HeatWeight => Q0Kind::Heat(self.s.unwrap_or(f64::NAN)),
            ScenarioKind::Custom => self.q0.unwrap_or(Q0Kind::Identity),
        };
        TwistSpec::new(q0, self.inertia.unwrap_or_else(InertiaSpec::identity))
    }

    /// `(key, value)` pairs in canonical order; unset optional keys are omitted.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("scenario", self.scenario.name().to_string()), ("N", self.cutoff.to_string())];
        if let Some(p) = self.p {
            out.push(("p", p.to_string()));
        }
        if let Some(s) = self.s {
            out.push(("s", format!("{s}")));
        }
        if let Some(q) = self.q0 {
            out.push(("q0", format_q0(q)));
        }
        if let Some(i) = self.inertia {
            out.push(("inertia", format!("{}, {}, {}", i.base, i.bump, i.width)));
        }
        out.push(("initial", self.initial.to_string()));
        out.push((
            "integrator",
            match self.integrator {
                Integrator::Rk4 => "rk4",
                Integrator::ImplicitMidpoint => "implicit_midpoint",
            }
            .into(),
        ));
        out.push(("h", format!("{}", self.step)));
        out.push(("T", format!("{}", self.horizon)));
        out.push(("stride", self.stride.to_string()));
        out.push(("xi", self.xis.iter().map(|&z| format_complex(z)).collect::<Vec<_>>().join(", ")));
        out.push(("k", self.ks.iter().map(u32::to_string).collect::<Vec<_>>().join(", ")));
        if let Some(t) = self.step_tolerance {
            out.push(("step_tolerance", format!("{t}")));
        }
        out.push(("track_spectrum", self.track_spectrum.to_string()));
        out.push(("snapshots", self.snapshots.to_string()));
        out.push(("csv", self.csv.clone()));
        out.push(("manifest", self.manifest.clone()));
        out
    }

    /// Text that [`parse_config`] maps back to `self`.
    pub fn serialize(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Parses and validates a configuration, collecting every violation.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<Violation>> {
    let mut errors = Vec::new();
    let mut seen: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            errors.push(Violation {
                line: Some(lineno),
                message: format!("expected `key = value`, found `{line}`"),
            });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            errors.push(Violation {
                line: Some(lineno),
                message: format!("unknown key `{key}`"),
            });
            continue;
        };
        if let Some((first, _)) = seen.get(known) {
            errors.push(Violation {
                line: Some(lineno),
                message: format!("duplicate key `{key}` (first set on line {first}, again on line {lineno})"),
            });
            continue;
        }
        seen.insert(known, (lineno, value));
    }

    let mut bad = |key: &str, message: String| {
        errors.push(Violation {
            line: seen.get(key).map(|(l, _)| *l),
            message: format!("{key}: {message}"),
        })
    };
    let get = |key: &str| seen.get(key).map(|(_, v)| *v);

    let scenario = match get("scenario") {
        None => {
            bad("scenario", "missing required key".into());
            None
        }
        Some("laplacian_power") => Some(ScenarioKind::LaplacianPower),
        Some("heat_weight") => Some(ScenarioKind::HeatWeight),
        Some("custom") => Some(ScenarioKind::Custom),
        Some(other) => {
            bad("scenario", format!("unknown scenario `{other}`"));
            None
        }
    };

    let cutoff = match get("N").map(str::parse::<usize>) {
        None => 128,
        Some(Ok(n)) if (MIN_CUTOFF..=MAX_CUTOFF).contains(&n) => n,
        Some(Ok(n)) => {
            bad("N", format!("value {n} outside [{MIN_CUTOFF}, {MAX_CUTOFF}]"));
            128
        }
        Some(Err(_)) => {
            bad("N", "not a non-negative integer".into());
            128
        }
    };

    let mut p = None;
    let mut s = None;
    let mut q0 = None;
    let uses = |k: ScenarioKind| scenario == Some(k);
    if let Some(v) = get("p") {
        if !uses(ScenarioKind::LaplacianPower) {
            bad("p", "only used by scenario laplacian_power".into());
        } else {
            match v.parse::<i32>() {
                Ok(x) if (1..=4).contains(&x) => p = Some(x),
                Ok(x) => bad("p", format!("value {x} outside [1, 4]")),
                Err(_) => bad("p", "not an integer".into()),
            }
        }
    } else if uses(ScenarioKind::LaplacianPower) {
        p = Some(1);
    }
    if let Some(v) = get("s") {
        if !uses(ScenarioKind::HeatWeight) {
            bad("s", "only used by scenario heat_weight".into());
        } else {
            match v.parse::<f64>() {
                Ok(x) if x > 0.0 && x.is_finite() => s = Some(x),
                Ok(x) => bad("s", format!("value {x} must be positive")),
                Err(_) => bad("s", "not a number".into()),
            }
        }
    } else if uses(ScenarioKind::HeatWeight) {
        bad("s", "missing; required by scenario heat_weight".into());
    }
    if let Some(v) = get("q0") {
        if !uses(ScenarioKind::Custom) {
            bad("q0", "only used by scenario custom".into());
        } else {
            match parse_q0(v) {
                Some(q) => match TwistSpec::new(q, InertiaSpec::identity()) {
                    Ok(_) => q0 = Some(q),
                    Err(e) => bad("q0", e.to_string()),
                },
                None => bad("q0", format!("cannot parse `{v}`")),
            }
        }
    } else if uses(ScenarioKind::Custom) {
        bad("q0", "missing; required by scenario custom".into());
    }
    let heat = match (s, q0) {
        (Some(s), _) => Some(s),
        (None, Some(Q0Kind::Heat(s))) => Some(s),
        _ => None,
    };
    if let Some(s) = heat {
        let exponent = s * (cutoff * cutoff) as f64;
        if exponent > OVERFLOW_GUARD {
            bad(
                if q0.is_some() { "q0" } else { "s" },
                format!("s·N² = {exponent} exceeds the overflow guard {OVERFLOW_GUARD}"),
            );
        }
    }

    let inertia = get("inertia").and_then(|v| {
        let parts: Vec<_> = split_list(v).map(str::parse::<f64>).collect();
        match parts.as_slice() {
            [Ok(b), Ok(u), Ok(w)] => match InertiaSpec::new(*b, *u, *w) {
                Ok(i) => Some(i),
                Err(e) => {
                    bad("inertia", e.to_string());
                    None
                }
            },
            _ => {
                bad("inertia", "expected three numbers `base, bump, width`".into());
                None
            }
        }
    });

    let initial = match get("initial") {
        None => InitialSpec::Identity,
        Some(v) => parse_initial(v).unwrap_or_else(|| {
            bad("initial", format!("cannot parse `{v}`"));
            InitialSpec::Identity
        }),
    };

    let integrator = match get("integrator") {
        None | Some("rk4") => Integrator::Rk4,
        Some("implicit_midpoint") => Integrator::ImplicitMidpoint,
        Some(other) => {
            bad("integrator", format!("unknown integrator `{other}`"));
            Integrator::Rk4
        }
    };

    let mut positive = |key: &str, default: f64| match get(key).map(str::parse::<f64>) {
        None => default,
        Some(Ok(x)) if x > 0.0 && x.is_finite() => x,
        Some(Ok(x)) => {
            bad(key, format!("value {x} must be positive"));
            default
        }
        Some(Err(_)) => {
            bad(key, "not a number".into());
            default
        }
    };
    let step = positive("h", 1e-3);
    let horizon = positive("T", 1.0);
    let step_tolerance = get("step_tolerance").map(|_| positive("step_tolerance", 0.0));
    if step > horizon {
        bad("h", format!("step {step} exceeds horizon T = {horizon}"));
    }

    let stride = match get("stride").map(str::parse::<usize>) {
        None => 50,
        Some(Ok(n)) if n >= 1 => n,
        _ => {
            bad("stride", "expected a positive integer".into());
            50
        }
    };

    let xis = match get("xi") {
        None => vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
        Some(v) => {
            let parsed: Option<Vec<C64>> = split_list(v).map(parse_complex).collect();
            parsed.unwrap_or_else(|| {
                bad("xi", format!("cannot parse `{v}`"));
                Vec::new()
            })
        }
    };
    let ks = match get("k") {
        None => vec![1, 2, 3, 4],
        Some(v) => {
            let parsed: Result<Vec<u32>, _> = split_list(v).map(str::parse::<u32>).collect();
            match parsed {
                Ok(ks) if !ks.is_empty() && ks.iter().all(|k| (1..=8).contains(k)) => ks,
                _ => {
                    bad("k", "expected integers in [1, 8]".into());
                    Vec::new()
                }
            }
        }
    };

    let mut flag = |key: &str, default: bool| match get(key) {
        None => default,
        Some(v) => parse_bool(v).unwrap_or_else(|| {
            bad(key, "expected `true` or `false`".into());
            default
        }),
    };
    let track_spectrum = flag("track_spectrum", true);
    let snapshots = flag("snapshots", false);

    let mut file_name = |key: &str, default: &str| match get(key) {
        None => default.to_string(),
        Some(v) if !v.is_empty() && !v.contains(['/', '\\']) => v.to_string(),
        Some(v) => {
            bad(key, format!("`{v}` must be a plain file name"));
            default.to_string()
        }
    };
    let csv = file_name("csv", "trajectory.csv");
    let manifest = file_name("manifest", "manifest.json");

    if !errors.is_empty() {
        errors.sort_by_key(|v| v.line.unwrap_or(usize::MAX));
        return Err(errors);
    }
    Ok(ScenarioConfig {
        scenario: scenario.expect("checked above"),
        cutoff,
        p,
        s,
        q0,
        inertia,
        initial,
        integrator,
        step,
        horizon,
        stride,
        xis,
        ks,
        step_tolerance,
        track_spectrum,
        snapshots,
        csv,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = parse_config("scenario = laplacian_power\n").unwrap();
        assert_eq!(cfg.cutoff, 128);
        assert_eq!(cfg.step, 1e-3);
        assert_eq!(cfg.horizon, 1.0);
        assert_eq!(cfg.p, Some(1));
        assert_eq!(cfg.initial, InitialSpec::Identity);
        assert_eq!(cfg.ks, vec![1, 2, 3, 4]);
    }

    #[test]
    fn cutoff_range() {
        let errs = parse_config("scenario = laplacian_power\nN = 4\n").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, Some(2));
        assert!(errs[0].message.contains("outside"));
    }

    #[test]
    fn duplicate_key_names_lines() {
        let errs = parse_config("scenario = laplacian_power\n# c\nN = 16\nN = 32\n").unwrap_err();
        assert!(errs[0].to_string().contains("line 3") && errs[0].to_string().contains("line 4"), "{}", errs[0]);
    }

    #[test]
    fn collects_every_violation() {
        let errs = parse_config("N = 4\nfoo = 1\nh = -1\nintegrator = euler\n").unwrap_err();
        assert_eq!(errs.len(), 5, "{errs:?}");
        assert!(errs.iter().any(|e| e.message.contains("scenario: missing")));
    }

    #[test]
    fn heat_guard() {
        let errs = parse_config("scenario = heat_weight\ns = 0.1\nN = 128\n").unwrap_err();
        assert!(errs[0].message.contains("overflow guard"));
        assert!(parse_config("scenario = heat_weight\ns = 0.01\nN = 128\n").is_ok());
        assert!(parse_config("scenario = heat_weight\n").is_err());
    }

    #[test]
    fn round_trip() {
        let text = "scenario = custom\nq0 = heat(0.02)\ninertia = 1, 0.5, 3\nN = 32\n\
                    initial = smoothing({3:1, 1:0.1-0.2i})\nintegrator = implicit_midpoint\n\
                    h = 0.01\nT = 0.5\nstride = 5\nxi = 0, 2-1i, i\nk = 1, 3\nstep_tolerance = 1e-9\n\
                    track_spectrum = false\nsnapshots = true\ncsv = a.csv\nmanifest = b.json\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(parse_config(&cfg.serialize()).unwrap(), cfg);
        for init in ["paper_62(3)", "trig(2)", "random(0.25)", "file:states/x0.txt", "identity"] {
            let cfg = parse_config(&format!("scenario = laplacian_power\ninitial = {init}\n")).unwrap();
            assert_eq!(parse_config(&cfg.serialize()).unwrap(), cfg);
        }
    }
}
