//! Nested-interval certificates for real orbits of `g(x) = alpha exp(e^{x^2} + sin x)`.
//!
//! Blocks are `I_k = [2k pi, (2k+1) pi]` (where `sin >= 0`) or
//! `J_k = [(2k+5/4) pi, (2k+7/4) pi]` (where `sin < 0`). Level `j+1` picks the
//! block `k'` or `k'+1` inside the image of the level-`j` block, `k'` being the
//! first block to the right of its left image endpoint.
//!
//! Beyond the first level, neighbouring blocks have identical tower
//! representations, so a block is stored as an enclosure of its left endpoint
//! plus its exact width, and containment is checked through the log-width
//! `ln(g(b) / g(a)) = e^{a^2} (e^{2aw + w^2} - 1)` of the image, which is
//! increasing in `a` and therefore bounded below by its value at the lower end
//! of the enclosure.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::efun::{FnKind, FunctionSpec};
use crate::xnum::{SignedTower, TowerReal, XnumError};

const K0_SEARCH: u64 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("interval chains need a HardyG function (got {0})")]
    NotHardy(String),
    #[error("depth must be at least 1")]
    Depth,
    #[error("choice string must have length {expected} and contain only 0/1 (got {got:?})")]
    Choices { expected: usize, got: String },
    #[error("k0 = {k0} too small: the image of the first block holds fewer than two blocks; need k0 >= {required}")]
    K0TooSmall { k0: u64, required: u64 },
    #[error("g is not increasing on the first block")]
    NotIncreasing,
    #[error(transparent)]
    Xnum(#[from] XnumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainMode {
    SSet,
    JBlocks,
}

impl ChainMode {
    /// Block `k` is `[2k pi + lo, 2k pi + hi]`.
    fn offsets(self) -> (f64, f64) {
        match self {
            ChainMode::SSet => (0.0, PI),
            ChainMode::JBlocks => (1.25 * PI, 1.75 * PI),
        }
    }

    fn width(self) -> f64 {
        let (lo, hi) = self.offsets();
        hi - lo
    }

    /// Range of `sin` over any block.
    fn sin_range(self) -> (f64, f64) {
        match self {
            ChainMode::SSet => (0.0, 1.0),
            ChainMode::JBlocks => (-1.0, -FRAC_1_SQRT_2),
        }
    }

    /// `sin` at both block endpoints.
    fn sin_endpoint(self) -> f64 {
        match self {
            ChainMode::SSet => 0.0,
            ChainMode::JBlocks => -FRAC_1_SQRT_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChainMode::SSet => "s-set",
            ChainMode::JBlocks => "j-blocks",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub level: usize,
    /// Choice bit that selected this block (`None` at level 0).
    pub bit: Option<u8>,
    /// Enclosure of the block's left endpoint; the block is `[left, left + width]`.
    pub left_lo: TowerReal,
    pub left_hi: TowerReal,
    pub width: f64,
    /// Lower bound on `ln(g(b) / g(a))` for this block `[a, b]`, when it was branched from.
    pub log_image_width: Option<TowerReal>,
    /// The image of this block contains the next two blocks.
    pub contains_next: Option<bool>,
    /// Enclosure of the points of the level-0 block that land in this block after `level` steps.
    pub pullback: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalChain {
    pub function: FunctionSpec,
    pub mode: ChainMode,
    pub k0: u64,
    pub choices: String,
    pub steps: Vec<ChainStep>,
    pub certified: bool,
    /// Pullbacks are nested and nonempty.
    pub nested: bool,
}

impl IntervalChain {
    pub fn depth(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn last(&self) -> &ChainStep {
        self.steps.last().expect("level 0 always present")
    }
}

/// Whether the final blocks of two chains are disjoint.
///
/// Chains with the same start that first differ at level `j` pick two distinct
/// blocks there; since `g` is injective on the reals, the images of disjoint
/// blocks are disjoint and every later block stays inside one of them. Returns
/// `None` when the chains are not comparable (different start or uncertified).
pub fn final_blocks_disjoint(a: &IntervalChain, b: &IntervalChain) -> Option<bool> {
    let comparable = a.function == b.function
        && a.mode == b.mode
        && a.k0 == b.k0
        && a.choices.len() == b.choices.len()
        && a.certified
        && b.certified;
    comparable.then(|| a.choices != b.choices)
}

fn down(x: TowerReal) -> TowerReal {
    x.next_down()
}

fn up(x: TowerReal) -> TowerReal {
    x.next_up()
}

fn down_signed(x: SignedTower) -> SignedTower {
    if x.is_negative() {
        SignedTower::new(true, x.magnitude().next_up())
    } else {
        SignedTower::positive(x.magnitude().next_down())
    }
}

struct Hardy {
    ln_alpha: f64,
}

impl Hardy {
    /// `ln g(a) = e^{a^2} + s + ln alpha`.
    fn ln_g(&self, a: TowerReal, s: f64) -> Result<SignedTower, XnumError> {
        SignedTower::positive(a.powf(2.0)?.exp()?).add_f64(s + self.ln_alpha)
    }

    /// Lower bound on `ln(g(a + w) / g(a))` for block endpoints with equal `sin`.
    fn log_width(&self, a: TowerReal, w: f64) -> Result<TowerReal, XnumError> {
        if let Some(x) = a.to_f64() {
            if x * x + 2.0 * x * w + w * w < 700.0 {
                let d = (x * x).exp() * (2.0 * x * w + w * w).exp_m1();
                return Ok(down(TowerReal::from_real(d)?));
            }
        }
        let q = a.scale(2.0 * w)?.add(&TowerReal::from_real(w * w)?)?;
        Ok(down(a.powf(2.0)?.exp()?.mul(&q.exp()?.sub(&TowerReal::ONE)?)?))
    }

    /// Enclosure of `g^{-1}(y)` for `y` whose preimage has `sin` in `[s_lo, s_hi]`.
    fn inverse(&self, y: TowerReal, s: f64) -> Result<Option<TowerReal>, XnumError> {
        if y.is_zero() {
            return Ok(None);
        }
        let v = y.ln_signed()?.add_f64(-(self.ln_alpha + s))?;
        if v.is_negative() || v.magnitude() <= TowerReal::ONE {
            return Ok(Some(TowerReal::ZERO));
        }
        let u = v.magnitude().ln()?;
        Ok(Some(u.powf(0.5)?))
    }
}

// ln(e^d - 1) from below, d given as a tower
fn ln_expm1_lower(d: TowerReal) -> Result<SignedTower, XnumError> {
    match d.to_f64() {
        Some(x) if x < 700.0 => SignedTower::from_f64(x.exp_m1().ln()),
        _ => SignedTower::positive(d).add_f64(-LN_2),
    }
}

/// Checks that the image of `[a, a + w]` (left endpoint at least `a_lo`) holds two blocks.
fn image_holds_two(h: &Hardy, mode: ChainMode, a_lo: TowerReal) -> Result<(bool, TowerReal), XnumError> {
    let w = mode.width();
    let delta = h.log_width(a_lo, w)?;
    // g(b) - g(a) = g(a) (e^delta - 1) must exceed 4 pi + w
    let lhs = h.ln_g(a_lo, mode.sin_endpoint())?.add(&ln_expm1_lower(delta)?)?;
    let need = SignedTower::from_f64((4.0 * PI + w).ln())?;
    Ok((down_signed(lhs) >= need, delta))
}

/// Next block left endpoint enclosure, from the current one and a choice bit.
fn next_left(h: &Hardy, mode: ChainMode, lo: TowerReal, hi: TowerReal, bit: u8) -> Result<(TowerReal, TowerReal), XnumError> {
    let s = mode.sin_endpoint();
    let g_lo = down(h.ln_g(lo, s)?.exp()?);
    let g_hi = up(h.ln_g(hi, s)?.exp()?);
    let shift = 2.0 * PI * bit as f64;
    // the chosen left endpoint lies in [g(a), g(a) + 2 pi) before the shift
    let new_lo = g_lo.add(&TowerReal::from_real(shift)?)?;
    let new_hi = up(g_hi.add(&TowerReal::from_real(shift + 2.0 * PI)?)?);
    Ok((new_lo, new_hi))
}

fn check_increasing(alpha_kind: FnKind, a: f64, w: f64) -> bool {
    debug_assert_eq!(alpha_kind, FnKind::HardyG);
    // g' = g (2x e^{x^2} + cos x)
    (0..=1000).all(|i| {
        let x = a + w * i as f64 / 1000.0;
        let d = 2.0 * x * (x * x).min(700.0).exp() + x.cos();
        d > 0.0
    })
}

pub fn build_interval_chain(
    f: &FunctionSpec,
    mode: ChainMode,
    depth: usize,
    choices: &str,
    k0: u64,
) -> Result<IntervalChain, ChainError> {
    if f.kind != FnKind::HardyG {
        return Err(ChainError::NotHardy(f.name()));
    }
    if depth == 0 {
        return Err(ChainError::Depth);
    }
    let bits: Vec<u8> = choices
        .chars()
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect::<Option<_>>()
        .filter(|b: &Vec<u8>| b.len() == depth)
        .ok_or_else(|| ChainError::Choices { expected: depth, got: choices.to_string() })?;
    let h = Hardy { ln_alpha: f.ln_alpha() };
    let (lo_off, _) = mode.offsets();
    let w = mode.width();
    let start = |k: u64| 2.0 * PI * k as f64 + lo_off;
    if !check_increasing(f.kind, start(k0), w) {
        return Err(ChainError::NotIncreasing);
    }
    let (ok0, _) = image_holds_two(&h, mode, TowerReal::from_real(start(k0))?)?;
    if !ok0 {
        let required = (k0 + 1..k0 + K0_SEARCH)
            .find(|&k| {
                TowerReal::from_real(start(k))
                    .and_then(|a| image_holds_two(&h, mode, a))
                    .is_ok_and(|(ok, _)| ok)
            })
            .unwrap_or(k0 + K0_SEARCH);
        return Err(ChainError::K0TooSmall { k0, required });
    }
    let a0 = TowerReal::from_real(start(k0))?;
    let mut steps = vec![ChainStep {
        level: 0,
        bit: None,
        left_lo: a0,
        left_hi: a0,
        width: w,
        log_image_width: None,
        contains_next: None,
        pullback: (start(k0), start(k0) + w),
    }];
    let mut certified = true;
    for (j, &bit) in bits.iter().enumerate() {
        let (lo, hi) = (steps[j].left_lo, steps[j].left_hi);
        let (holds, delta) = image_holds_two(&h, mode, lo)?;
        certified &= holds;
        steps[j].log_image_width = Some(delta);
        steps[j].contains_next = Some(holds);
        let (nlo, nhi) = next_left(&h, mode, lo, hi, bit)?;
        steps.push(ChainStep {
            level: j + 1,
            bit: Some(bit),
            left_lo: nlo,
            left_hi: nhi,
            width: w,
            log_image_width: None,
            contains_next: None,
            pullback: (0.0, 0.0),
        });
    }
    let nested = fill_pullbacks(&h, mode, &mut steps)?;
    Ok(IntervalChain { function: *f, mode, k0, choices: choices.to_string(), steps, certified, nested })
}

// pulls each block back to level 0 through the enclosing blocks, intersecting on the way
fn fill_pullbacks(h: &Hardy, mode: ChainMode, steps: &mut [ChainStep]) -> Result<bool, XnumError> {
    let (s_lo, s_hi) = mode.sin_range();
    let w = TowerReal::from_real(mode.width())?;
    let mut nested = true;
    let mut prev = (steps[0].left_lo, steps[0].left_hi.add(&w)?);
    for j in 1..steps.len() {
        let mut lo = steps[j].left_lo;
        let mut hi = steps[j].left_hi.add(&w)?;
        for i in (0..j).rev() {
            let blk_lo = steps[i].left_lo;
            let blk_hi = steps[i].left_hi.add(&w)?;
            // larger sin lowers the preimage of a given value
            let plo = h.inverse(lo, s_hi)?.map_or(blk_lo, down);
            let phi = h.inverse(hi, s_lo)?.map_or(blk_hi, up);
            lo = plo.max(blk_lo);
            hi = phi.min(blk_hi);
        }
        nested &= lo <= hi && lo >= prev.0 && hi <= prev.1;
        steps[j].pullback = (lo.to_f64().unwrap_or(f64::NAN), hi.to_f64().unwrap_or(f64::NAN));
        prev = (lo, hi);
    }
    Ok(nested)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> FunctionSpec {
        FunctionSpec::hardy_g(0.01).unwrap()
    }

    #[test]
    fn depth_one_certifies() {
        let c = build_interval_chain(&g(), ChainMode::SSet, 1, "0", 1).unwrap();
        assert!(c.certified && c.nested);
        assert_eq!(c.steps.len(), 2);
    }

    #[test]
    fn level_one_block_follows_image() {
        // g(2 pi) = 0.01 exp(e^{4 pi^2}), so ln ln of the next left endpoint is 4 pi^2
        let c = build_interval_chain(&g(), ChainMode::SSet, 1, "0", 1).unwrap();
        let l = c.steps[1].left_lo.ln().unwrap().ln().unwrap().to_f64().unwrap();
        assert!((l - 4.0 * PI * PI).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_choices() {
        assert!(matches!(
            build_interval_chain(&g(), ChainMode::SSet, 2, "0x", 1),
            Err(ChainError::Choices { .. })
        ));
        assert!(matches!(
            build_interval_chain(&FunctionSpec::exp(), ChainMode::SSet, 1, "0", 1),
            Err(ChainError::NotHardy(_))
        ));
    }

    #[test]
    fn opposite_choices_are_disjoint() {
        let a = build_interval_chain(&g(), ChainMode::SSet, 3, "000", 1).unwrap();
        let b = build_interval_chain(&g(), ChainMode::SSet, 3, "111", 1).unwrap();
        assert!(a.certified && b.certified);
        assert_eq!(final_blocks_disjoint(&a, &b), Some(true));
        assert_eq!(final_blocks_disjoint(&a, &a), Some(false));
    }
}
