use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use escape_atlas::efun::{FnKind, FunctionSpec};
use escape_atlas::escape::{ChainMode, ClassifierConfig, Window};
use escape_atlas::maxmod::GrowthLemma;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "escape-atlas", version, about = "Fast escaping points of transcendental entire functions")]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "ESCAPE_ATLAS_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Classify every pixel of a window; writes a PGM and a legend JSON.
    ClassifyGrid(ClassifyGridArgs),
    /// Classify one point.
    ClassifyPoint(ClassifyPointArgs),
    /// Maximum modulus M(r, f) over a range of radii.
    Maxmod(ModulusArgs),
    /// Minimum modulus m(r, f) over a range of radii.
    Minmod(ModulusArgs),
    /// Iterated maximum modulus M^n(R, f).
    Ladder(LadderArgs),
    /// psi_c(r) = min_n M^n(cr) / M^n(r).
    PsiC(PsiArgs),
    /// epsilon(r) = 2 C^{1-1/D} / psi_c(r)^{1/D}.
    EpsilonR(EpsilonArgs),
    /// D_tau in closed form and by quadrature.
    Dtau(DtauArgs),
    /// Growth inequalities for M over a radius grid.
    LemmaCheck(LemmaArgs),
    /// Maximum-modulus locus curves.
    Locus(LocusArgs),
    /// Winding-number coverage of log-uniform targets by f^n(A(r, lambda'' r)).
    CoverCheck(CoverArgs),
    /// Two-annulus covering check.
    CorollaryCheck(CorollaryArgs),
    /// Fast, never-maximal orbit radii.
    FastOrbit(FastOrbitArgs),
    /// Nested-interval certificate on the real axis for g.
    IntervalChain(ChainArgs),
    /// Real fixed points of g.
    HardyFixedPoints(AlphaArgs),
    /// Argmax angle of |g| against the sign of sin r.
    HardyLocus(HardyLocusArgs),
    /// Preimages of the positive imaginary axis under g, as CSV.
    Figure1(Figure1Args),
    /// Inequalities of g in the thin sector V.
    SectorCheck(SectorArgs),
    /// g^{n+1}(x) >= M(g^n(x), g) / e^2 along a real orbit.
    GsizeCheck(GsizeArgs),
}

impl Command {
    /// Fills in defaults so the embedded config names every value used.
    pub fn resolve(&mut self) {
        let f = match self {
            Command::ClassifyGrid(a) => &mut a.f,
            Command::ClassifyPoint(a) => &mut a.f,
            Command::Maxmod(a) | Command::Minmod(a) => &mut a.f,
            Command::Ladder(a) => &mut a.f,
            Command::PsiC(a) => &mut a.f,
            Command::EpsilonR(a) => &mut a.f,
            Command::LemmaCheck(a) => {
                if a.lemma.is_empty() {
                    a.lemma = vec![LemmaName::Mrc, LemmaName::Mnrc, LemmaName::Mdr];
                }
                &mut a.f
            }
            Command::Locus(a) => &mut a.f,
            Command::CoverCheck(a) => &mut a.f,
            Command::CorollaryCheck(a) => &mut a.f,
            Command::FastOrbit(a) => &mut a.f,
            Command::IntervalChain(a) => {
                if a.choices.is_none() {
                    a.choices = Some("0".repeat(a.depth));
                }
                return;
            }
            _ => return,
        };
        if let Ok(spec) = f.spec() {
            f.alpha = Some(spec.alpha);
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::ClassifyGrid(_) => "classify-grid",
            Command::ClassifyPoint(_) => "classify-point",
            Command::Maxmod(_) => "maxmod",
            Command::Minmod(_) => "minmod",
            Command::Ladder(_) => "ladder",
            Command::PsiC(_) => "psi-c",
            Command::EpsilonR(_) => "epsilon-r",
            Command::Dtau(_) => "dtau",
            Command::LemmaCheck(_) => "lemma-check",
            Command::Locus(_) => "locus",
            Command::CoverCheck(_) => "cover-check",
            Command::CorollaryCheck(_) => "corollary-check",
            Command::FastOrbit(_) => "fast-orbit",
            Command::IntervalChain(_) => "interval-chain",
            Command::HardyFixedPoints(_) => "hardy-fixed-points",
            Command::HardyLocus(_) => "hardy-locus",
            Command::Figure1(_) => "figure1",
            Command::SectorCheck(_) => "sector-check",
            Command::GsizeCheck(_) => "gsize-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FnName {
    Exp,
    RotExp,
    HardyG,
    ExpFamily,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FnArgs {
    #[arg(long = "function", value_enum, default_value = "exp")]
    pub function: FnName,
    /// Parameter for hardy-g (default 0.01) and exp-family (default 0.1).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
}

impl FnArgs {
    pub fn spec(&self) -> Result<FunctionSpec, String> {
        let (kind, default) = match self.function {
            FnName::Exp => (FnKind::Exp, 1.0),
            FnName::RotExp => (FnKind::RotExp, 1.0),
            FnName::HardyG => (FnKind::HardyG, 0.01),
            FnName::ExpFamily => (FnKind::ExpFamily, 0.1),
        };
        FunctionSpec::new(kind, self.alpha.unwrap_or(default)).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ClassifierArgs {
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Ladder base R (default: smallest 1.5^k with M(R) > 2R).
    #[arg(long)]
    pub ladder_r: Option<f64>,
    #[arg(long)]
    pub ell_max: Option<usize>,
}

impl ClassifierArgs {
    pub fn config(&self) -> ClassifierConfig {
        ClassifierConfig { depth: self.depth, tol_max: self.tol, ladder_r: self.ladder_r, ell_max: self.ell_max }
    }
}

/// Output paths; JSON goes to stdout when `--out` is absent.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OutArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! text_arg {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", serde_json::to_string(self).map_err(|_| fmt::Error)?)
            }
        }
    };
}

fn floats(s: &str, n: usize, what: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad {what} {s:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("{what} needs {n} comma-separated numbers (got {s:?})"));
    }
    Ok(v)
}

/// `x_min,y_min,x_max,y_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowArg(pub Window);

impl FromStr for WindowArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = floats(s, 4, "window")?;
        if !(v[0] < v[2] && v[1] < v[3]) {
            return Err(format!("window needs x_min < x_max and y_min < y_max (got {s:?})"));
        }
        Ok(WindowArg(Window::new(v[0], v[1], v[2], v[3])))
    }
}
text_arg!(WindowArg);

/// `WxH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub width: usize,
    pub height: usize,
}

impl FromStr for Resolution {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("resolution must be WxH (got {s:?})"))?;
        let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad resolution {s:?}: {e}"));
        let r = Resolution { width: p(w)?, height: p(h)? };
        if r.width == 0 || r.height == 0 || r.width > 16384 || r.height > 16384 {
            return Err(format!("resolution sides must lie in 1..=16384 (got {s:?})"));
        }
        Ok(r)
    }
}
text_arg!(Resolution);

/// `start:stop:step` (inclusive of `stop` up to rounding), or a single number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeArg {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl RangeArg {
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + self.step * i as f64).collect()
    }
}

impl FromStr for RangeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad range {s:?}: {e}"));
        let r = match parts[..] {
            [one] => {
                let v = p(one)?;
                RangeArg { start: v, stop: v, step: 1.0 }
            }
            [a, b, c] => RangeArg { start: p(a)?, stop: p(b)?, step: p(c)? },
            _ => return Err(format!("range must be start:stop:step (got {s:?})")),
        };
        if !(r.step > 0.0 && r.stop >= r.start && r.start.is_finite() && r.stop.is_finite()) {
            return Err(format!("range needs step > 0 and stop >= start (got {s:?})"));
        }
        if (r.stop - r.start) / r.step > 1e7 {
            return Err(format!("range {s:?} has too many points"));
        }
        Ok(r)
    }
}
text_arg!(RangeArg);

/// `re,im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexArg {
    pub re: f64,
    pub im: f64,
}

impl FromStr for ComplexArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = floats(s, 2, "complex number")?;
        Ok(ComplexArg { re: v[0], im: v[1] })
    }
}
text_arg!(ComplexArg);

fn list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad list {s:?}: {e}"))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListArg(pub Vec<f64>);

impl FromStr for ListArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        list(s).map(ListArg)
    }
}
text_arg!(ListArg);

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ClassifyGridArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long, allow_hyphen_values = true, default_value = "-4,-4,4,4")]
    pub window: WindowArg,
    #[arg(long, default_value = "256x256")]
    pub res: Resolution,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    /// PGM path; the legend JSON is written next to it with extension `.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ClassifyPointArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub z: ComplexArg,
    #[command(flatten)]
    pub classifier: ClassifierArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ModulusArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long)]
    pub r: RangeArg,
    /// Always scan the circle, even where a closed form exists.
    #[arg(long)]
    pub sampled: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LadderArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PsiArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long, default_value_t = 1.5)]
    pub c: f64,
    #[arg(long)]
    pub r: RangeArg,
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EpsilonArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 3.0)]
    pub lambda_p: f64,
    #[arg(long, default_value_t = 12.0)]
    pub lambda_pp: f64,
    #[arg(long)]
    pub r: RangeArg,
    #[arg(long, default_value_t = 20.0)]
    pub c_param: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DtauArgs {
    #[arg(long)]
    pub tau: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum LemmaName {
    #[value(name = "Mrc")]
    Mrc,
    #[value(name = "Mnrc")]
    Mnrc,
    #[value(name = "Mdr")]
    Mdr,
}

impl LemmaName {
    pub fn lemma(self) -> GrowthLemma {
        match self {
            LemmaName::Mrc => GrowthLemma::Mrc,
            LemmaName::Mnrc => GrowthLemma::Mnrc,
            LemmaName::Mdr => GrowthLemma::Mdr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LemmaArgs {
    #[command(flatten)]
    pub f: FnArgs,
    /// Repeat to check several; default all three.
    #[arg(long, value_enum)]
    pub lemma: Vec<LemmaName>,
    #[arg(long, default_value = "2")]
    pub c: ListArg,
    #[arg(long, default_value = "2")]
    pub d: ListArg,
    #[arg(long)]
    pub r: RangeArg,
    #[arg(long, default_value_t = 1)]
    pub n_max: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LocusArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long)]
    pub r: RangeArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CoverArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 8.0)]
    pub lambda_pp: f64,
    #[arg(long, default_value_t = 1000)]
    pub targets: usize,
    /// Target radii are log-uniform in [w_min, w_max].
    #[arg(long)]
    pub w_min: f64,
    #[arg(long)]
    pub w_max: f64,
    /// CSV of uncovered targets.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CorollaryArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub s: f64,
    #[arg(long)]
    pub s_p: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub t_p: f64,
    #[arg(long, default_value_t = 200)]
    pub targets: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FastOrbitArgs {
    #[command(flatten)]
    pub f: FnArgs,
    #[arg(long)]
    pub r1: f64,
    #[arg(long, default_value_t = 3)]
    pub k_max: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    SSet,
    JBlocks,
}

impl ModeArg {
    pub fn mode(self) -> ChainMode {
        match self {
            ModeArg::SSet => ChainMode::SSet,
            ModeArg::JBlocks => ChainMode::JBlocks,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "s-set")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Binary string of length `depth` (default all zeros).
    #[arg(long)]
    pub choices: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub k0: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct AlphaArgs {
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HardyLocusArgs {
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value = "0.5:30:0.1")]
    pub r: RangeArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Figure1Args {
    /// Recorded for provenance; the level curves of the argument do not depend on it.
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub x_start: f64,
    #[arg(long, default_value_t = 6.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Number of levels pi/2 + 2 pi k, each with its mirror image.
    #[arg(long, default_value_t = 4)]
    pub curves: usize,
    /// CSV path for the curves.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SectorArgs {
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    pub k: f64,
    #[arg(long, default_value_t = 2500)]
    pub samples: usize,
    /// Also test g(B(0, 2K') u i(0, inf)) inside B(0, 1) for this K'.
    #[arg(long)]
    pub inclusion_k: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GsizeArgs {
    #[arg(long, default_value_t = 0.01)]
    pub alpha: f64,
    #[arg(long)]
    pub x: f64,
    #[arg(long, default_value_t = 3)]
    pub n_max: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(argv: &[&str]) -> Command {
        let mut c = Cli::try_parse_from(std::iter::once("escape-atlas").chain(argv.iter().copied())).unwrap().command;
        c.resolve();
        c
    }

    #[test]
    fn config_round_trips() {
        let cases: &[&[&str]] = &[
            &["classify-grid", "--window", "-4,-4,4,4", "--res", "256x256", "--depth", "20", "--out", "grid.pgm"],
            &["classify-point", "--function", "exp-family", "--z", "-1e-3,2.5", "--ladder-r", "4"],
            &["lemma-check", "--lemma", "Mrc", "--lemma", "Mdr", "--c", "2,3.5", "--r", "1:10:0.25"],
            &["cover-check", "--r", "10", "--w-min", "1", "--w-max", "1e4", "--csv", "u.csv"],
            &["corollary-check", "--r", "10", "--s", "3", "--s-p", "6", "--t", "100", "--t-p", "1000"],
            &["interval-chain", "--mode", "j-blocks", "--depth", "4"],
            &["figure1", "--out", "fig1.csv"],
            &["sector-check", "--inclusion-k", "0.5"],
        ];
        for argv in cases {
            let c = parse(argv);
            let text = serde_json::to_string(&c).unwrap();
            let back: Command = serde_json::from_str(&text).unwrap();
            assert_eq!(back, c, "{argv:?}");
        }
    }

    #[test]
    fn grammar() {
        assert_eq!("8x3".parse::<Resolution>().unwrap(), Resolution { width: 8, height: 3 });
        assert!("8x".parse::<Resolution>().is_err());
        assert_eq!("1:2:0.5".parse::<RangeArg>().unwrap().values(), vec![1.0, 1.5, 2.0]);
        assert_eq!("0.1:0.3:0.1".parse::<RangeArg>().unwrap().values().len(), 3);
        assert_eq!("7".parse::<RangeArg>().unwrap().values(), vec![7.0]);
        assert!("3:1:1".parse::<RangeArg>().is_err());
        assert!("1,1,0,2".parse::<WindowArg>().is_err());
        assert_eq!("-1,2".parse::<ComplexArg>().unwrap(), ComplexArg { re: -1.0, im: 2.0 });
    }

    #[test]
    fn defaults_resolve() {
        match parse(&["maxmod", "--function", "hardy-g", "--r", "2"]) {
            Command::Maxmod(a) => assert_eq!(a.f.alpha, Some(0.01)),
            _ => unreachable!(),
        }
        match parse(&["interval-chain", "--depth", "3"]) {
            Command::IntervalChain(a) => assert_eq!(a.choices.as_deref(), Some("000")),
            _ => unreachable!(),
        }
    }
}
