//! Binary image restoration on a grid UGM with 2x2-patch cliques:
//! pattern-based potentials, bit-flip noise, synthetic test images,
//! PBM I/O, and the restoration pipeline with its metrics.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hypergraph::{Clique, Edge, Hypergraph};
use crate::lp::{
    classify_and_round, solve_binary_ip_with, solve_lp, IpOptions, IpReport, SolveReport, EPS_INT,
};
use crate::objective::MultilinearObjective;
use crate::relax::{build_relaxation, RelaxationKind};

#[derive(Debug, Error)]
pub enum RestoreError {
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("relative gap is undefined for a zero reference optimum")]
    ZeroReferenceOptimum,
    #[error("malformed PBM at line {line}: {message}")]
    PbmParse { line: usize, message: String },
}

/// A black-and-white image; `true` pixels are ones (black in PBM).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BitImage {
    pub fn new(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0);
        BitImage {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<bool>) -> Self {
        assert_eq!(pixels.len(), width * height);
        BitImage {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    /// Row-major pixel index; this is also the hypergraph node id.
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        y * self.width + x
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[self.index(x, y)]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        let i = self.index(x, y);
        self.pixels[i] = v;
    }

    pub fn ones(&self) -> usize {
        self.pixels.iter().filter(|&&b| b).count()
    }

    /// Plain PBM (P1). One image row per line; `1` is a set pixel.
    pub fn to_pbm(&self) -> String {
        use std::fmt::Write;
        let mut out = format!("P1\n{} {}\n", self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(if self.get(x, y) { '1' } else { '0' });
                out.push(if x + 1 == self.width { '\n' } else { ' ' });
            }
        }
        let _ = write!(out, "");
        out
    }

    pub fn from_pbm(text: &str) -> Result<Self, RestoreError> {
        let err = |line: usize, message: &str| RestoreError::PbmParse {
            line,
            message: message.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim_start().starts_with('#') && !l.trim().is_empty());
        let (ln, magic) = lines.next().ok_or_else(|| err(1, "empty file"))?;
        if magic.trim() != "P1" {
            return Err(err(ln + 1, "expected P1 magic"));
        }
        let (ln, dims) = lines.next().ok_or_else(|| err(2, "missing dimensions"))?;
        let mut it = dims.split_whitespace();
        let width: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(ln + 1, "bad width"))?;
        let height: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| err(ln + 1, "bad height"))?;
        if width == 0 || height == 0 {
            return Err(err(ln + 1, "zero dimension"));
        }
        let mut pixels = Vec::with_capacity(width * height);
        let mut last_line = ln + 1;
        for (ln, l) in lines {
            last_line = ln + 1;
            for ch in l.chars() {
                match ch {
                    '0' => pixels.push(false),
                    '1' => pixels.push(true),
                    c if c.is_whitespace() => {}
                    _ => return Err(err(ln + 1, "unexpected character")),
                }
            }
        }
        if pixels.len() != width * height {
            return Err(err(last_line, "pixel count does not match dimensions"));
        }
        Ok(BitImage {
            width,
            height,
            pixels,
        })
    }
}

/// The four smoothness potentials of the 2x2 patch groups.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatternPotentials {
    pub phi: [f64; 4],
}

impl PatternPotentials {
    pub fn new(phi: [f64; 4]) -> Self {
        assert!(phi.iter().all(|p| p.is_finite()));
        PatternPotentials { phi }
    }
}

impl fmt::Display for PatternPotentials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({},{},{},{})",
            self.phi[0], self.phi[1], self.phi[2], self.phi[3]
        )
    }
}

/// The 2x2 cliques of an l-by-h grid in row-major order; pixel (x,y)
/// has node id y*l + x.
pub fn grid_cliques(l: usize, h: usize) -> Vec<Clique> {
    assert!(l >= 2 && h >= 2);
    let mut cliques = Vec::with_capacity((l - 1) * (h - 1));
    for y in 0..h - 1 {
        for x in 0..l - 1 {
            let id = |dx: usize, dy: usize| (y + dy) * l + (x + dx);
            cliques.push(Clique::new([id(0, 0), id(1, 0), id(0, 1), id(1, 1)]));
        }
    }
    cliques
}

/// Patch bit order used throughout: (x,y), (x,y+1), (x+1,y), (x+1,y+1).
pub type Patch = [bool; 4];

/// Smoothness group of a 2x2 patch, 1..=4:
/// 1 = constant; 2 = one odd pixel (weight 1 or 3); 3 = two equal
/// pixels that are edge-adjacent; 4 = diagonal pairs.
pub fn pattern_group(patch: Patch) -> usize {
    let weight = patch.iter().filter(|&&b| b).count();
    match weight {
        0 | 4 => 1,
        1 | 3 => 2,
        _ => {
            // bits 0 and 3 (or 1 and 2) set means a diagonal pair
            if patch[0] == patch[3] {
                4
            } else {
                3
            }
        }
    }
}

fn group_of_mask(mask: usize) -> usize {
    pattern_group([
        mask & 1 != 0,
        mask & 2 != 0,
        mask & 4 != 0,
        mask & 8 != 0,
    ])
}

/// Integer multipliers m[S][i] with c_S = Σ_i m[S][i]·φ_i: the Möbius
/// inversion of the group labels over the 16 patch subsets. All-integer,
/// which makes the interpolation identity exactly checkable for any φ.
pub fn pattern_multipliers() -> [[i64; 4]; 16] {
    let mut mult = [[0i64; 4]; 16];
    for s in 0..16usize {
        let mut t = s;
        loop {
            let sign = if (s.count_ones() - t.count_ones()) % 2 == 0 {
                1
            } else {
                -1
            };
            mult[s][group_of_mask(t) - 1] += sign;
            if t == 0 {
                break;
            }
            t = (t - 1) & s;
        }
    }
    mult
}

/// Per-patch coefficients c_S indexed by the 4-bit subset mask of the
/// patch positions; the unique multilinear interpolant of the group
/// potentials: Σ_{S ⊆ supp(x)} c_S = φ_group(x) for every patch x.
pub fn potentials_to_coefficients(phi: &PatternPotentials) -> [f64; 16] {
    let mult = pattern_multipliers();
    let mut c = [0.0; 16];
    for s in 0..16 {
        for i in 0..4 {
            c[s] += mult[s][i] as f64 * phi.phi[i];
        }
    }
    c
}

/// Grid hypergraph plus the full objective: the data term ±alpha per
/// pixel against the noisy observation, and the smoothness
/// coefficients accumulated over every 2x2 clique. Empty-set
/// coefficients accumulate in the objective's constant.
pub fn build_restoration_objective(
    noisy: &BitImage,
    alpha: f64,
    phi: &PatternPotentials,
) -> (Hypergraph, MultilinearObjective) {
    let (l, h) = (noisy.width(), noisy.height());
    let hypergraph =
        Hypergraph::build(grid_cliques(l, h), l * h).expect("grid cliques are always valid");
    let coeffs = potentials_to_coefficients(phi);
    let mut obj = MultilinearObjective::new(l * h, alpha);
    for y in 0..h {
        for x in 0..l {
            let v = noisy.index(x, y);
            obj.add_node(v, if noisy.get(x, y) { alpha } else { -alpha });
        }
    }
    for y in 0..h - 1 {
        for x in 0..l - 1 {
            let ids = [
                noisy.index(x, y),
                noisy.index(x, y + 1),
                noisy.index(x + 1, y),
                noisy.index(x + 1, y + 1),
            ];
            for (s, &c) in coeffs.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let members: Vec<usize> =
                    (0..4).filter(|i| s & (1 << i) != 0).map(|i| ids[i]).collect();
                match members.len() {
                    0 => obj.constant += c,
                    1 => obj.add_node(members[0], c),
                    _ => obj.add_edge(Edge::new(members), c),
                }
            }
        }
    }
    (hypergraph, obj)
}

/// Independently flips each pixel with probability p; deterministic
/// per (image, p, seed).
pub fn apply_bit_flip_noise(img: &BitImage, p: f64, seed: u64) -> BitImage {
    assert!((0.0..=0.5).contains(&p), "flip probability must be in [0, 0.5]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pixels = img
        .pixels()
        .iter()
        .map(|&b| if rng.random::<f64>() < p { !b } else { b })
        .collect();
    BitImage::from_pixels(img.width(), img.height(), pixels)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Ones rectangle over the top-left quadrant.
    TopLeft,
    /// Centered rectangle of half the side lengths.
    Centered,
    /// Union of a centered horizontal and vertical bar, one fifth of
    /// the image thick (rounded up).
    Cross,
}

impl SyntheticKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TL" => Some(SyntheticKind::TopLeft),
            "CEN" => Some(SyntheticKind::Centered),
            "CROSS" => Some(SyntheticKind::Cross),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SyntheticKind::TopLeft => "TL",
            SyntheticKind::Centered => "CEN",
            SyntheticKind::Cross => "CROSS",
        }
    }
}

pub fn generate_synthetic_image(kind: SyntheticKind, l: usize, h: usize) -> BitImage {
    assert!(l >= 4 && h >= 4);
    let mut img = BitImage::new(l, h);
    match kind {
        SyntheticKind::TopLeft => {
            for y in 0..h / 2 {
                for x in 0..l / 2 {
                    img.set(x, y, true);
                }
            }
        }
        SyntheticKind::Centered => {
            let (wc, hc) = (l / 2, h / 2);
            let (x0, y0) = ((l - wc) / 2, (h - hc) / 2);
            for y in y0..y0 + hc {
                for x in x0..x0 + wc {
                    img.set(x, y, true);
                }
            }
        }
        SyntheticKind::Cross => {
            let tx = l.div_ceil(5);
            let ty = h.div_ceil(5);
            let (x0, y0) = ((l - tx) / 2, (h - ty) / 2);
            for y in 0..h {
                for x in 0..l {
                    if (x0..x0 + tx).contains(&x) || (y0..y0 + ty).contains(&y) {
                        img.set(x, y, true);
                    }
                }
            }
        }
    }
    img
}

/// Fraction of pixels on which the two images agree.
pub fn partial_recovery(truth: &BitImage, restored: &BitImage) -> Result<f64, RestoreError> {
    if truth.width() != restored.width() || truth.height() != restored.height() {
        return Err(RestoreError::DimensionMismatch(
            truth.width(),
            truth.height(),
            restored.width(),
            restored.height(),
        ));
    }
    let equal = truth
        .pixels()
        .iter()
        .zip(restored.pixels())
        .filter(|(a, b)| a == b)
        .count();
    Ok(equal as f64 / truth.pixels().len() as f64)
}

/// Relative optimality gap of a relaxation value g* against the exact
/// optimum f*, in percent.
#[derive(Clone, Copy, Debug)]
pub struct RelativeGap {
    /// (f* − g*)/f* × 100, the sign-sensitive form.
    pub r_g: f64,
    /// |g* − f*|/|f*| × 100.
    pub abs_r_g: f64,
}

pub fn relative_gap(f_star: f64, g_star: f64) -> Result<RelativeGap, RestoreError> {
    if f_star == 0.0 {
        return Err(RestoreError::ZeroReferenceOptimum);
    }
    Ok(RelativeGap {
        r_g: (f_star - g_star) / f_star * 100.0,
        abs_r_g: (g_star - f_star).abs() / f_star.abs() * 100.0,
    })
}

/// φ_i = −f_i where f_i is the average fraction of 2x2 patches falling
/// in group i across the given images.
pub fn learn_phi_from_frequencies(images: &[BitImage]) -> PatternPotentials {
    assert!(!images.is_empty(), "need at least one image");
    let mut counts = [0u64; 4];
    let mut total = 0u64;
    for img in images {
        for y in 0..img.height() - 1 {
            for x in 0..img.width() - 1 {
                let patch = [
                    img.get(x, y),
                    img.get(x, y + 1),
                    img.get(x + 1, y),
                    img.get(x + 1, y + 1),
                ];
                counts[pattern_group(patch) - 1] += 1;
                total += 1;
            }
        }
    }
    let mut phi = [0.0; 4];
    for i in 0..4 {
        phi[i] = -(counts[i] as f64 / total as f64);
    }
    PatternPotentials::new(phi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RestoreMethod {
    Lp(RelaxationKind),
    /// Exact optimum via branch-and-bound over the clique relaxation.
    Ip,
}

impl fmt::Display for RestoreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestoreMethod::Lp(kind) => kind.fmt(f),
            RestoreMethod::Ip => f.write_str("IP"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum SolveOutcome {
    Lp(SolveReport),
    Ip(IpReport),
}

impl SolveOutcome {
    pub fn objective_value(&self) -> f64 {
        match self {
            SolveOutcome::Lp(r) => r.objective_value,
            SolveOutcome::Ip(r) => r.objective_value,
        }
    }

    pub fn is_binary(&self) -> bool {
        match self {
            SolveOutcome::Lp(r) => r.is_binary,
            SolveOutcome::Ip(r) => r.is_binary,
        }
    }

    pub fn solution(&self) -> &[f64] {
        match self {
            SolveOutcome::Lp(r) => &r.solution,
            SolveOutcome::Ip(r) => &r.solution,
        }
    }

    pub fn num_node_vars(&self) -> usize {
        match self {
            SolveOutcome::Lp(r) => r.num_node_vars,
            SolveOutcome::Ip(r) => r.num_node_vars,
        }
    }

    pub fn wall_time(&self) -> f64 {
        match self {
            SolveOutcome::Lp(r) => r.wall_time,
            SolveOutcome::Ip(r) => r.wall_time,
        }
    }

    pub fn status(&self) -> crate::lp::SolveStatus {
        match self {
            SolveOutcome::Lp(r) => r.status,
            SolveOutcome::Ip(r) => r.status,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RestoreResult {
    pub restored: BitImage,
    pub outcome: SolveOutcome,
    pub is_binary: bool,
    /// Objective value plus the constant dropped from the LP columns.
    pub total_value: f64,
    /// Against the supplied ground truth, when given.
    pub partial_recovery: Option<f64>,
    /// Against the supplied exact optimum, when given.
    pub gap: Option<RelativeGap>,
}

/// End-to-end restoration: build the grid model, solve with the chosen
/// method, round the node variables back to an image, and attach
/// metrics. `ip_value`, when given, is the exact optimum used for the
/// gap; `truth` enables the recovery metric.
pub fn restore(
    noisy: &BitImage,
    alpha: f64,
    phi: &PatternPotentials,
    method: RestoreMethod,
    truth: Option<&BitImage>,
    ip_value: Option<f64>,
) -> RestoreResult {
    restore_with_budget(noisy, alpha, phi, method, truth, ip_value, IpOptions::default())
}

/// [`restore`] with an explicit branch-and-bound node budget for the
/// IP method.
pub fn restore_with_budget(
    noisy: &BitImage,
    alpha: f64,
    phi: &PatternPotentials,
    method: RestoreMethod,
    truth: Option<&BitImage>,
    ip_value: Option<f64>,
    opts: IpOptions,
) -> RestoreResult {
    let (h, obj) = build_restoration_objective(noisy, alpha, phi);
    let outcome = match method {
        RestoreMethod::Lp(kind) => {
            let lp = build_relaxation(&h, kind, &obj);
            SolveOutcome::Lp(solve_lp(&lp))
        }
        RestoreMethod::Ip => {
            let lp = build_relaxation(&h, RelaxationKind::Clique, &obj);
            let binaries: Vec<usize> = (0..h.node_count()).collect();
            SolveOutcome::Ip(solve_binary_ip_with(&lp, &binaries, opts))
        }
    };
    let report = SolveReport {
        status: crate::lp::SolveStatus::Optimal,
        objective_value: outcome.objective_value(),
        solution: outcome.solution().to_vec(),
        is_binary: outcome.is_binary(),
        num_node_vars: outcome.num_node_vars(),
        iterations: 0,
        wall_time: outcome.wall_time(),
    };
    let (is_binary, bits) = classify_and_round(&report, EPS_INT);
    let restored = BitImage::from_pixels(noisy.width(), noisy.height(), bits);
    let partial = truth.and_then(|t| partial_recovery(t, &restored).ok());
    let gap = ip_value.and_then(|f_star| {
        relative_gap(f_star + obj.constant, outcome.objective_value() + obj.constant).ok()
    });
    RestoreResult {
        restored,
        is_binary,
        total_value: outcome.objective_value() + obj.constant,
        outcome,
        partial_recovery: partial,
        gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_clique_counts() {
        assert_eq!(grid_cliques(2, 2).len(), 1);
        assert_eq!(grid_cliques(3, 3).len(), 4);
        assert_eq!(grid_cliques(15, 15).len(), 196);
    }

    #[test]
    fn pattern_groups_match_table() {
        assert_eq!(pattern_group([false; 4]), 1);
        assert_eq!(pattern_group([true; 4]), 1);
        assert_eq!(pattern_group([false, false, false, true]), 2);
        assert_eq!(pattern_group([true, true, true, false]), 2);
        // edge-adjacent equal pairs
        assert_eq!(pattern_group([true, true, false, false]), 3);
        assert_eq!(pattern_group([false, false, true, true]), 3);
        assert_eq!(pattern_group([true, false, true, false]), 3);
        assert_eq!(pattern_group([false, true, false, true]), 3);
        // diagonals
        assert_eq!(pattern_group([true, false, false, true]), 4);
        assert_eq!(pattern_group([false, true, true, false]), 4);
    }

    /// Exact interpolation identity in integer arithmetic: for every
    /// patch x, the multipliers of {c_S : S ⊆ supp(x)} sum to the unit
    /// vector of group(x). This proves Σ c_S = φ_group(x) for ALL φ.
    #[test]
    fn multiplier_table_interpolates_exactly() {
        let mult = pattern_multipliers();
        for x in 0..16usize {
            let mut total = [0i64; 4];
            let mut s = x;
            loop {
                for i in 0..4 {
                    total[i] += mult[s][i];
                }
                if s == 0 {
                    break;
                }
                s = (s - 1) & x;
            }
            let mut unit = [0i64; 4];
            unit[group_of_mask(x) - 1] = 1;
            assert_eq!(total, unit, "patch mask {x}");
        }
    }

    #[test]
    fn constant_potentials_collapse_to_constant() {
        let phi = PatternPotentials::new([7.0; 4]);
        let c = potentials_to_coefficients(&phi);
        assert_eq!(c[0], 7.0);
        for s in 1..16 {
            assert_eq!(c[s], 0.0, "mask {s}");
        }
    }

    #[test]
    fn paper_parameter_coefficients_interpolate() {
        let phi = PatternPotentials::new([-10.0, -20.0, -30.0, -40.0]);
        let c = potentials_to_coefficients(&phi);
        for x in 0..16usize {
            let mut sum = 0.0;
            let mut s = x;
            loop {
                sum += c[s];
                if s == 0 {
                    break;
                }
                s = (s - 1) & x;
            }
            assert!((sum - phi.phi[group_of_mask(x) - 1]).abs() < 1e-9);
        }
    }

    #[test]
    fn objective_matches_direct_patch_evaluation() {
        let truth = generate_synthetic_image(SyntheticKind::TopLeft, 4, 4);
        let noisy = apply_bit_flip_noise(&truth, 0.3, 11);
        let phi = PatternPotentials::new([-10.0, -20.0, -30.0, -40.0]);
        let alpha = 25.0;
        let (_, obj) = build_restoration_objective(&noisy, alpha, &phi);
        // evaluate on an arbitrary assignment and compare with the
        // data term plus per-patch group potentials
        let img = apply_bit_flip_noise(&truth, 0.2, 99);
        let direct_data: f64 = img
            .pixels()
            .iter()
            .zip(noisy.pixels())
            .map(|(&z, &y)| if z { if y { alpha } else { -alpha } } else { 0.0 })
            .sum();
        let mut direct_smooth = 0.0;
        for y in 0..3 {
            for x in 0..3 {
                let patch = [
                    img.get(x, y),
                    img.get(x, y + 1),
                    img.get(x + 1, y),
                    img.get(x + 1, y + 1),
                ];
                direct_smooth += phi.phi[pattern_group(patch) - 1];
            }
        }
        let val = obj.evaluate(img.pixels());
        assert!((val - (direct_data + direct_smooth)).abs() < 1e-9);
    }

    #[test]
    fn noise_is_deterministic_and_p0_is_identity() {
        let img = generate_synthetic_image(SyntheticKind::Cross, 8, 8);
        assert_eq!(apply_bit_flip_noise(&img, 0.0, 5), img);
        let a = apply_bit_flip_noise(&img, 0.3, 42);
        let b = apply_bit_flip_noise(&img, 0.3, 42);
        assert_eq!(a, b);
        assert_ne!(a, img);
    }

    #[test]
    fn noise_rate_within_binomial_bounds() {
        // p=0.5 over many trials: flips ~ Binomial(n·trials, 0.5)
        let img = BitImage::new(10, 10);
        let trials = 200;
        let mut flips = 0usize;
        for seed in 0..trials {
            let noisy = apply_bit_flip_noise(&img, 0.5, seed);
            flips += noisy.ones();
        }
        let n = (100 * trials) as f64;
        let sigma = (n * 0.25).sqrt();
        assert!((flips as f64 - n / 2.0).abs() < 5.0 * sigma);
    }

    #[test]
    fn synthetic_geometry() {
        let tl = generate_synthetic_image(SyntheticKind::TopLeft, 4, 4);
        assert_eq!(tl.ones(), 4);
        assert!(tl.get(0, 0) && tl.get(1, 1) && !tl.get(2, 2));
        let cen = generate_synthetic_image(SyntheticKind::Centered, 15, 15);
        assert_eq!(cen.ones(), 49);
        let cross = generate_synthetic_image(SyntheticKind::Cross, 15, 15);
        for y in 0..15 {
            for x in 0..15 {
                assert_eq!(cross.get(x, y), cross.get(14 - x, y));
                assert_eq!(cross.get(x, y), cross.get(x, 14 - y));
            }
        }
    }

    #[test]
    fn recovery_fraction() {
        let a = generate_synthetic_image(SyntheticKind::TopLeft, 15, 15);
        assert_eq!(partial_recovery(&a, &a).unwrap(), 1.0);
        let inverted =
            BitImage::from_pixels(15, 15, a.pixels().iter().map(|b| !b).collect());
        assert_eq!(partial_recovery(&a, &inverted).unwrap(), 0.0);
        let mut one_off = a.clone();
        one_off.set(7, 7, !one_off.get(7, 7));
        assert!((partial_recovery(&a, &one_off).unwrap() - 224.0 / 225.0).abs() < 1e-12);
        let small = BitImage::new(4, 4);
        assert!(partial_recovery(&a, &small).is_err());
    }

    #[test]
    fn gap_arithmetic() {
        let g = relative_gap(-100.0, -50.0).unwrap();
        assert!((g.r_g - 50.0).abs() < 1e-12);
        let g = relative_gap(-10.0, 15.0).unwrap();
        assert!((g.r_g - 250.0).abs() < 1e-12);
        assert!((g.abs_r_g - 250.0).abs() < 1e-12);
        let g = relative_gap(4.0, 4.0).unwrap();
        assert_eq!(g.r_g, 0.0);
        assert!(relative_gap(0.0, 1.0).is_err());
    }

    #[test]
    fn learned_phi_extremes() {
        let zero = BitImage::new(6, 6);
        let phi = learn_phi_from_frequencies(std::slice::from_ref(&zero));
        assert_eq!(phi.phi, [-1.0, 0.0, 0.0, 0.0]);
        let mut checker = BitImage::new(6, 6);
        for y in 0..6 {
            for x in 0..6 {
                checker.set(x, y, (x + y) % 2 == 0);
            }
        }
        let phi = learn_phi_from_frequencies(&[checker]);
        assert_eq!(phi.phi, [0.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn pbm_round_trip() {
        let img = generate_synthetic_image(SyntheticKind::Cross, 7, 5);
        let text = img.to_pbm();
        let back = BitImage::from_pbm(&text).unwrap();
        assert_eq!(img, back);
        assert!(text.starts_with("P1\n7 5\n"));
    }

    #[test]
    fn restore_small_image_clique_is_binary() {
        let truth = generate_synthetic_image(SyntheticKind::TopLeft, 5, 5);
        let noisy = apply_bit_flip_noise(&truth, 0.1, 3);
        let phi = PatternPotentials::new([-10.0, -20.0, -30.0, -40.0]);
        let res = restore(
            &noisy,
            25.0,
            &phi,
            RestoreMethod::Lp(RelaxationKind::Clique),
            Some(&truth),
            None,
        );
        assert!(res.is_binary);
        assert!(res.partial_recovery.unwrap() > 0.5);
    }
}
