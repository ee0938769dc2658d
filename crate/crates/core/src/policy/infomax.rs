//! Greedy minimization of the exact entropy of the posterior of the maximal
//! mean, computed by quadrature. Two-armed Bernoulli games only.

use crate::posterior::{summarize_bernoulli, ArmCounts};
use crate::rng::{pick, StreamRng};
use crate::special::ln_beta;

use super::aim::first_unpulled;
use super::{GameView, Policy};

/// Densities below `exp(LN_CUTOFF)` are treated as zero.
const LN_CUTOFF: f64 = -60.0;

/// Uniform grid on [0, 1] with composite Simpson weights.
#[derive(Debug, Clone)]
pub struct EntropyGrid {
    h: f64,
    x: Vec<f64>,
    ln_x: Vec<f64>,
    ln_1mx: Vec<f64>,
    weight: Vec<f64>,
}

impl EntropyGrid {
    /// `points` must be odd and at least 3.
    pub fn new(points: usize) -> Self {
        assert!(points >= 3 && points % 2 == 1, "simpson grid needs an odd number of points");
        let h = 1.0 / (points - 1) as f64;
        let x: Vec<f64> = (0..points).map(|j| j as f64 * h).collect();
        let ln_x = x.iter().map(|v| v.ln()).collect();
        let ln_1mx = x.iter().map(|v| (-v).ln_1p()).collect();
        let weight = (0..points)
            .map(|j| {
                let w = if j == 0 || j == points - 1 {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * h / 3.0
            })
            .collect();
        Self { h, x, ln_x, ln_1mx, weight }
    }

    pub fn points(&self) -> usize {
        self.x.len()
    }
}

/// Posterior density and CDF of one arm on the part of the grid where the
/// density is not negligible. Below the window the CDF is 0, above it 1.
#[derive(Debug, Clone, Default)]
struct Density {
    lo: usize,
    pdf: Vec<f64>,
    ln_pdf: Vec<f64>,
    cdf: Vec<f64>,
    /// Prefix sums of `w p ln p` over the window, one longer than `pdf`.
    self_cum: Vec<f64>,
}

impl Density {
    fn hi(&self) -> usize {
        self.lo + self.pdf.len() - 1
    }

    #[inline]
    fn at(&self, j: usize) -> (f64, f64) {
        if j < self.lo {
            (0.0, 0.0)
        } else if j - self.lo >= self.pdf.len() {
            (0.0, 1.0)
        } else {
            (self.pdf[j - self.lo], self.cdf[j - self.lo])
        }
    }

    /// `sum w p ln p` over grid indices `lo..=hi` inside the window.
    fn self_sum(&self, lo: usize, hi: usize) -> f64 {
        let (lo, hi) = (lo.max(self.lo), hi.min(self.hi()));
        if lo > hi {
            return 0.0;
        }
        self.self_cum[hi + 1 - self.lo] - self.self_cum[lo - self.lo]
    }

    fn finish(&mut self, grid: &EntropyGrid) {
        self.self_cum.clear();
        self.self_cum.push(0.0);
        let mut acc = 0.0;
        for (k, (&p, &lp)) in self.pdf.iter().zip(&self.ln_pdf).enumerate() {
            if p > 0.0 {
                acc += grid.weight[self.lo + k] * p * lp;
            }
            self.self_cum.push(acc);
        }
    }

    fn fill(&mut self, grid: &EntropyGrid, counts: &ArmCounts) {
        let s = counts.reward;
        let n = counts.pulls as f64;
        let (am1, bm1) = (s, n - s);
        let ln_norm = -ln_beta(s + 1.0, n - s + 1.0);
        let ln_pdf = |j: usize| {
            let mut v = ln_norm;
            if am1 != 0.0 {
                v += am1 * grid.ln_x[j];
            }
            if bm1 != 0.0 {
                v += bm1 * grid.ln_1mx[j];
            }
            v
        };
        let last = grid.points() - 1;
        let mode = if counts.pulls == 0 { last / 2 } else { ((s / n) * last as f64).round() as usize };
        let mut lo = mode;
        while lo > 0 && ln_pdf(lo - 1) > LN_CUTOFF {
            lo -= 1;
        }
        let mut hi = mode;
        while hi < last && ln_pdf(hi + 1) > LN_CUTOFF {
            hi += 1;
        }
        self.lo = lo;
        self.ln_pdf.clear();
        self.ln_pdf.extend((lo..=hi).map(ln_pdf));
        self.pdf.clear();
        self.pdf.extend(self.ln_pdf.iter().map(|v| v.exp()));
        cumulate(&self.pdf, grid.h, &mut self.cdf);
        self.finish(grid);
    }

    /// Density after one more pull with the given outcome, via the exact
    /// parameter-shift relations of the beta family.
    fn shifted(&self, grid: &EntropyGrid, counts: &ArmCounts, success: bool, out: &mut Density) {
        let s = counts.reward;
        let n = counts.pulls as f64;
        let range = self.lo..=self.hi();
        let (ln_factor, par) = if success { (&grid.ln_x[range.clone()], s + 1.0) } else { (&grid.ln_1mx[range.clone()], n - s + 1.0) };
        let scale = (n + 2.0) / par;
        let ln_scale = scale.ln();
        let sign = if success { -1.0 } else { 1.0 };
        out.lo = self.lo;
        out.pdf.clear();
        out.ln_pdf.clear();
        out.cdf.clear();
        for (k, &x) in grid.x[range].iter().enumerate() {
            let (p, f) = (self.pdf[k], self.cdf[k]);
            let factor = if success { x } else { 1.0 - x };
            out.pdf.push(p * factor * scale);
            out.ln_pdf.push(self.ln_pdf[k] + ln_factor[k] + ln_scale);
            out.cdf.push((f + sign * x * (1.0 - x) * p / par).clamp(0.0, 1.0));
        }
        out.finish(grid);
    }
}

/// Running integral of `f` with a fourth-order local rule, normalized so the
/// last value is exactly one.
fn cumulate(f: &[f64], h: f64, out: &mut Vec<f64>) {
    out.clear();
    let m = f.len();
    out.push(0.0);
    if m == 1 {
        out[0] = 1.0;
        return;
    }
    let mut acc = 0.0;
    for j in 0..m - 1 {
        let step = if m == 2 {
            0.5 * h * (f[0] + f[1])
        } else if j == 0 {
            h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
        } else if j == m - 2 {
            h / 12.0 * (5.0 * f[j + 1] + 8.0 * f[j] - f[j - 1])
        } else {
            h / 24.0 * (-f[j - 1] + 13.0 * f[j] + 13.0 * f[j + 1] - f[j + 2])
        };
        acc += step;
        out.push(acc);
    }
    if acc > 0.0 {
        for v in out.iter_mut() {
            *v = (*v / acc).clamp(0.0, 1.0);
        }
    }
}

/// `-∫ p_max ln p_max` with `p_max = p1 F2 + p2 F1`.
fn entropy_of(grid: &EntropyGrid, a: &Density, b: &Density) -> f64 {
    entropy_over(grid, a, b, a.lo.min(b.lo), a.hi().max(b.hi()))
}

/// The same integral restricted to grid indices `lo..=hi`. Below the window
/// of either arm `p_max` vanishes and above it `p_max` is the other arm's own
/// density, so only the overlap of the windows needs a pointwise pass.
fn entropy_over(grid: &EntropyGrid, a: &Density, b: &Density, lo: usize, hi: usize) -> f64 {
    let mut acc = a.self_sum(lo.max(b.hi() + 1), hi) + b.self_sum(lo.max(a.hi() + 1), hi);
    let start = lo.max(a.lo).max(b.lo);
    let end = hi.min(a.hi()).min(b.hi());
    for j in start..=end.max(start) {
        if j > end {
            break;
        }
        let (p1, f1) = a.at(j);
        let (p2, f2) = b.at(j);
        let pm = p1 * f2 + p2 * f1;
        if pm > 0.0 {
            acc += grid.weight[j] * pm * pm.ln();
        }
    }
    -acc
}

/// Entropy of the posterior of the larger of two Bernoulli means.
pub fn exact_entropy(arms: &[ArmCounts; 2], grid: &EntropyGrid) -> f64 {
    let mut a = Density::default();
    let mut b = Density::default();
    a.fill(grid, &arms[0]);
    b.fill(grid, &arms[1]);
    entropy_of(grid, &a, &b)
}

pub fn infomax_select(arms: &[ArmCounts; 2], grid: &EntropyGrid, rng: &mut StreamRng) -> usize {
    Infomax::with_grid("infomax-numeric".to_string(), grid.clone()).decide(arms, rng)
}

/// Current posterior of one arm and its two one-step successors.
#[derive(Debug, Clone, Default)]
struct ArmDensities {
    counts: Option<ArmCounts>,
    base: Density,
    up: Density,
    down: Density,
}

impl ArmDensities {
    fn refresh(&mut self, grid: &EntropyGrid, counts: &ArmCounts) {
        if self.counts == Some(*counts) {
            return;
        }
        self.base.fill(grid, counts);
        self.base.shifted(grid, counts, true, &mut self.up);
        self.base.shifted(grid, counts, false, &mut self.down);
        self.counts = Some(*counts);
    }
}

pub struct Infomax {
    name: String,
    grid: EntropyGrid,
    arms: [ArmDensities; 2],
}

impl Infomax {
    pub fn new(name: impl Into<String>, grid_points: usize) -> Self {
        Self::with_grid(name.into(), EntropyGrid::new(grid_points))
    }

    fn with_grid(name: String, grid: EntropyGrid) -> Self {
        Self { name, grid, arms: Default::default() }
    }

    fn decide(&mut self, arms: &[ArmCounts; 2], rng: &mut StreamRng) -> usize {
        if let Some(i) = first_unpulled(arms) {
            return i;
        }
        let (sa, sb) = (summarize_bernoulli(&arms[0]), summarize_bernoulli(&arms[1]));
        if sa.theta == sb.theta {
            return match arms[0].pulls.cmp(&arms[1].pulls) {
                std::cmp::Ordering::Less => 0,
                std::cmp::Ordering::Greater => 1,
                std::cmp::Ordering::Equal => pick(rng, 2),
            };
        }
        let (hi, lo) = if sa.theta > sb.theta { (0, 1) } else { (1, 0) };
        let (max, min) = if hi == 0 { (sa, sb) } else { (sb, sa) };
        if min.n_eff >= max.n_eff {
            return hi;
        }
        for (slot, counts) in self.arms.iter_mut().zip(arms) {
            slot.refresh(&self.grid, counts);
        }
        let g_hi = self.gradient(arms, hi);
        let g_lo = self.gradient(arms, lo);
        if g_hi > g_lo {
            hi
        } else if g_lo > g_hi {
            lo
        } else {
            pick(rng, 2)
        }
    }

    /// Expected entropy change from pulling arm `i`. Outside the window of
    /// arm `i` the integrand does not depend on that arm, so only the window
    /// is integrated.
    fn gradient(&self, arms: &[ArmCounts; 2], i: usize) -> f64 {
        let p = arms[i].reward / arms[i].pulls as f64;
        let (me, other) = (&self.arms[i], &self.arms[1 - i].base);
        let (lo, hi) = (me.base.lo, me.base.hi());
        let base = entropy_over(&self.grid, &me.base, other, lo, hi);
        let mut expected = 0.0;
        for (next, weight) in [(&me.up, p), (&me.down, 1.0 - p)] {
            if weight != 0.0 {
                expected += weight * entropy_over(&self.grid, next, other, lo, hi);
            }
        }
        (expected - base).abs()
    }
}

impl Policy for Infomax {
    fn name(&self) -> &str {
        &self.name
    }

    fn select(&mut self, view: &GameView<'_>, rng: &mut StreamRng) -> usize {
        let arms: &[ArmCounts; 2] = view.arms.try_into().expect("infomax plays two arms");
        self.decide(arms, rng)
    }
}
