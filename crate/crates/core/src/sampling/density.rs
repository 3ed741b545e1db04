//! Built-in density models on flat domains.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kv::{fmt_f64, fmt_f64_list, KeyValues};

use super::quadrature::{composite_rule, gauss_legendre};

/// Quadrature nodes per axis used for numerical normalization.
pub const NORMALIZATION_NODES: usize = 512;

/// Radius of the embedded unit-length circle.
pub const CIRCLE_RADIUS: f64 = 1.0 / (2.0 * PI);

const CIRCLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// Closed axis-aligned box `[lo, hi]`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Closed unit disk in the plane.
    UnitDisk,
    /// Closed curve of length one, `θ ↦ (cos 2πθ, sin 2πθ) / 2π`, `θ ∈ [0, 1)`.
    Circle,
}

impl Domain {
    pub fn unit_square() -> Self {
        Domain::Box {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        }
    }

    pub fn centered_square() -> Self {
        Domain::Box {
            lo: vec![-0.5, -0.5],
            hi: vec![0.5, 0.5],
        }
    }

    /// Ambient dimension of the points.
    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::UnitDisk | Domain::Circle => 2,
        }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self {
            Domain::Circle => 1,
            _ => self.dim(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *v >= *l && *v <= *h),
            Domain::UnitDisk => x[0] * x[0] + x[1] * x[1] <= 1.0,
            Domain::Circle => ((x[0] * x[0] + x[1] * x[1]).sqrt() - CIRCLE_RADIUS).abs() <= CIRCLE_TOL,
        }
    }

    /// Lebesgue measure (length for the circle).
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            Domain::UnitDisk => PI,
            Domain::Circle => 1.0,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Domain::Box { .. } => "box",
            Domain::UnitDisk => "unit_disk",
            Domain::Circle => "circle",
        }
    }
}

/// Arc-length parameter `θ ∈ [0, 1)` of a point on the embedded circle.
pub fn circle_param(x: &[f64]) -> f64 {
    let t = x[1].atan2(x[0]) / (2.0 * PI);
    if t < 0.0 {
        t + 1.0
    } else {
        t
    }
}

/// Point on the embedded circle at arc-length parameter `θ`.
pub fn circle_point(theta: f64) -> [f64; 2] {
    let a = 2.0 * PI * theta;
    [CIRCLE_RADIUS * a.cos(), CIRCLE_RADIUS * a.sin()]
}

/// One isotropic Gaussian of a mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    pub mean: Vec<f64>,
    pub sigma: f64,
    pub weight: f64,
}

impl Gaussian {
    fn pdf(&self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        let r2: f64 = x.iter().zip(&self.mean).map(|(a, b)| (a - b) * (a - b)).sum();
        (2.0 * PI * self.sigma * self.sigma).powf(-d / 2.0) * (-r2 / (2.0 * self.sigma * self.sigma)).exp()
    }

    fn peak(&self, d: usize) -> f64 {
        (2.0 * PI * self.sigma * self.sigma).powf(-(d as f64) / 2.0)
    }
}

/// Unnormalized density shapes. The model multiplies by a numerically
/// computed normalizer so the density integrates to one on its domain.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    Uniform,
    /// `1 + slope·x₁`.
    Linear { slope: f64 },
    /// `(τ + x₁²)⁻¹` on the unit disk.
    DiskValley { tau: f64 },
    /// `τ / |Ω| + (1 − τ) Σ wᵢ N(μᵢ, σᵢ²I)` on a box.
    GaussianMixtureBg { tau: f64, components: Vec<Gaussian> },
    /// Piecewise constant: 1 off the strip `|x₁ − center| < width / 2`, `ratio` on it.
    StripGap { ratio: f64, width: f64, center: f64 },
    /// `1 + amplitude·sin 2πθ` on the unit-length circle.
    CircleSine { amplitude: f64 },
    /// Bilinear interpolation of positive values on a regular `nx × ny` grid covering a 2-D box.
    /// `values[i * ny + j]` sits at node `(i, j)`.
    CustomGrid { nx: usize, ny: usize, values: Vec<f64> },
}

impl DensityKind {
    fn name(&self) -> &'static str {
        match self {
            DensityKind::Uniform => "uniform",
            DensityKind::Linear { .. } => "linear",
            DensityKind::DiskValley { .. } => "disk_valley",
            DensityKind::GaussianMixtureBg { .. } => "gaussian_mixture_bg",
            DensityKind::StripGap { .. } => "strip_gap",
            DensityKind::CircleSine { .. } => "circle_sine",
            DensityKind::CustomGrid { .. } => "custom_grid",
        }
    }
}

/// A probability density on a flat domain (or the unit-length circle).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    kind: DensityKind,
    domain: Domain,
    normalizer: f64,
    raw_min: f64,
    raw_max: f64,
}

impl DensityModel {
    pub fn new(kind: DensityKind, domain: Domain) -> Result<Self> {
        validate(&kind, &domain)?;
        let (raw_min, raw_max) = raw_bounds(&kind, &domain);
        if !(raw_min > 0.0 && raw_max.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "density must be positive and bounded, got range [{raw_min}, {raw_max}]"
            )));
        }
        let mut model = DensityModel {
            kind,
            domain,
            normalizer: 1.0,
            raw_min,
            raw_max,
        };
        let mass = model.raw_mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidModel(format!("total mass {mass} is not positive")));
        }
        model.normalizer = 1.0 / mass;
        Ok(model)
    }

    pub fn uniform(domain: Domain) -> Result<Self> {
        Self::new(DensityKind::Uniform, domain)
    }

    /// `ρ ∝ 1 + slope·x₁` on `[-½, ½]²`.
    pub fn linear(slope: f64) -> Result<Self> {
        Self::new(DensityKind::Linear { slope }, Domain::centered_square())
    }

    pub fn disk_valley(tau: f64) -> Result<Self> {
        Self::new(DensityKind::DiskValley { tau }, Domain::UnitDisk)
    }

    /// Two-blob mixture on `[-1, 1]²` with background fraction `tau`.
    pub fn gaussian_mixture_bg(tau: f64) -> Result<Self> {
        let components = vec![
            Gaussian {
                mean: vec![-0.5, 0.0],
                sigma: 0.2,
                weight: 0.5,
            },
            Gaussian {
                mean: vec![0.5, 0.0],
                sigma: 0.2,
                weight: 0.5,
            },
        ];
        Self::new(
            DensityKind::GaussianMixtureBg { tau, components },
            Domain::Box {
                lo: vec![-1.0, -1.0],
                hi: vec![1.0, 1.0],
            },
        )
    }

    pub fn circle_sine(amplitude: f64) -> Result<Self> {
        Self::new(DensityKind::CircleSine { amplitude }, Domain::Circle)
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.domain.intrinsic_dim()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.domain.contains(x)
    }

    /// Multiplier turning the raw shape into a probability density.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Supremum of the normalized density (or a tight upper bound).
    pub fn sup(&self) -> f64 {
        self.raw_max * self.normalizer
    }

    /// Infimum of the normalized density (or a tight lower bound).
    pub fn inf(&self) -> f64 {
        self.raw_min * self.normalizer
    }

    /// Smallest `β ≥ 1` with `1/β ≤ ρ ≤ β` on the domain.
    pub fn beta(&self) -> f64 {
        self.sup().max(1.0 / self.inf()).max(1.0)
    }

    /// Normalized density at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        Ok(self.normalizer * self.raw(x))
    }

    /// Normalized density without the domain check; used by finite
    /// differences that may straddle the boundary.
    pub fn eval_extended(&self, x: &[f64]) -> f64 {
        self.normalizer * self.raw(x)
    }

    pub(crate) fn raw(&self, x: &[f64]) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::Linear { slope } => 1.0 + slope * x[0],
            DensityKind::DiskValley { tau } => 1.0 / (tau + x[0] * x[0]),
            DensityKind::GaussianMixtureBg { tau, components } => {
                tau / self.domain.volume()
                    + (1.0 - tau) * components.iter().map(|g| g.weight * g.pdf(x)).sum::<f64>()
            }
            DensityKind::StripGap {
                ratio,
                width,
                center,
            } => {
                if (x[0] - center).abs() < 0.5 * width {
                    *ratio
                } else {
                    1.0
                }
            }
            DensityKind::CircleSine { amplitude } => {
                1.0 + amplitude * (2.0 * PI * circle_param(x)).sin()
            }
            DensityKind::CustomGrid { nx, ny, values } => {
                let Domain::Box { lo, hi } = &self.domain else {
                    unreachable!("validated at construction")
                };
                bilinear(*nx, *ny, values, lo, hi, x)
            }
        }
    }

    /// Analytic gradient of the normalized density, when the model has one.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = x.len();
        let c = self.normalizer;
        match &self.kind {
            DensityKind::Uniform => Some(vec![0.0; d]),
            DensityKind::Linear { slope } => {
                let mut g = vec![0.0; d];
                g[0] = c * slope;
                Some(g)
            }
            DensityKind::DiskValley { tau } => {
                let s = tau + x[0] * x[0];
                Some(vec![-2.0 * c * x[0] / (s * s), 0.0])
            }
            DensityKind::GaussianMixtureBg { tau, components } => {
                let mut g = vec![0.0; d];
                for comp in components {
                    let w = c * (1.0 - tau) * comp.weight * comp.pdf(x);
                    let s2 = comp.sigma * comp.sigma;
                    for k in 0..d {
                        g[k] -= w * (x[k] - comp.mean[k]) / s2;
                    }
                }
                Some(g)
            }
            _ => None,
        }
    }

    /// Analytic Hessian (row-major `d × d`) of the normalized density.
    pub fn hessian(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = x.len();
        let c = self.normalizer;
        match &self.kind {
            DensityKind::Uniform | DensityKind::Linear { .. } => Some(vec![0.0; d * d]),
            DensityKind::DiskValley { tau } => {
                let s = tau + x[0] * x[0];
                let h00 = c * (-2.0 / (s * s) + 8.0 * x[0] * x[0] / (s * s * s));
                Some(vec![h00, 0.0, 0.0, 0.0])
            }
            DensityKind::GaussianMixtureBg { tau, components } => {
                let mut h = vec![0.0; d * d];
                for comp in components {
                    let w = c * (1.0 - tau) * comp.weight * comp.pdf(x);
                    let s2 = comp.sigma * comp.sigma;
                    for i in 0..d {
                        for j in 0..d {
                            let di = x[i] - comp.mean[i];
                            let dj = x[j] - comp.mean[j];
                            let delta = if i == j { 1.0 / s2 } else { 0.0 };
                            h[i * d + j] += w * (di * dj / (s2 * s2) - delta);
                        }
                    }
                }
                Some(h)
            }
            _ => None,
        }
    }

    /// Whether the density is smooth on the interior of its domain.
    pub fn is_smooth(&self) -> bool {
        !matches!(
            self.kind,
            DensityKind::StripGap { .. } | DensityKind::CustomGrid { .. }
        )
    }

    /// Short provenance string, e.g. `disk_valley(tau=0.25)`.
    pub fn tag(&self) -> String {
        let params = match &self.kind {
            DensityKind::Uniform => String::new(),
            DensityKind::Linear { slope } => format!("slope={slope}"),
            DensityKind::DiskValley { tau } => format!("tau={tau}"),
            DensityKind::GaussianMixtureBg { tau, components } => {
                format!("tau={tau},components={}", components.len())
            }
            DensityKind::StripGap {
                ratio,
                width,
                center,
            } => format!("ratio={ratio},width={width},center={center}"),
            DensityKind::CircleSine { amplitude } => format!("amplitude={amplitude}"),
            DensityKind::CustomGrid { nx, ny, .. } => format!("grid={nx}x{ny}"),
        };
        format!("{}[{}]({params})", self.kind.name(), self.domain.name())
    }

    /// Serializes the model as flat `key = value` lines.
    pub fn to_config(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        kv.set("kind", self.kind.name());
        kv.set("domain", self.domain.name());
        if let Domain::Box { lo, hi } = &self.domain {
            kv.set("lo", fmt_f64_list(lo));
            kv.set("hi", fmt_f64_list(hi));
        }
        match &self.kind {
            DensityKind::Uniform => {}
            DensityKind::Linear { slope } => kv.set("slope", fmt_f64(*slope)),
            DensityKind::DiskValley { tau } => kv.set("tau", fmt_f64(*tau)),
            DensityKind::GaussianMixtureBg { tau, components } => {
                kv.set("tau", fmt_f64(*tau));
                let means: Vec<f64> = components.iter().flat_map(|g| g.mean.clone()).collect();
                kv.set("means", fmt_f64_list(&means));
                let sig: Vec<f64> = components.iter().map(|g| g.sigma).collect();
                kv.set("sigmas", fmt_f64_list(&sig));
                let w: Vec<f64> = components.iter().map(|g| g.weight).collect();
                kv.set("weights", fmt_f64_list(&w));
            }
            DensityKind::StripGap {
                ratio,
                width,
                center,
            } => {
                kv.set("ratio", fmt_f64(*ratio));
                kv.set("width", fmt_f64(*width));
                kv.set("center", fmt_f64(*center));
            }
            DensityKind::CircleSine { amplitude } => kv.set("amplitude", fmt_f64(*amplitude)),
            DensityKind::CustomGrid { nx, ny, values } => {
                kv.set("grid_shape", format!("{nx},{ny}"));
                kv.set("grid_values", fmt_f64_list(values));
            }
        }
        kv
    }

    pub const CONFIG_KEYS: &'static [&'static str] = &[
        "kind",
        "domain",
        "lo",
        "hi",
        "slope",
        "tau",
        "means",
        "sigmas",
        "weights",
        "ratio",
        "width",
        "center",
        "amplitude",
        "grid_shape",
        "grid_values",
    ];

    /// Parses a model from flat `key = value` lines; unknown keys are errors.
    pub fn from_config(kv: &KeyValues) -> Result<Self> {
        kv.check_keys(Self::CONFIG_KEYS)?;
        let need = |key: &str| -> Result<f64> {
            kv.f64(key)?
                .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
        };
        let domain = match kv.get("domain") {
            None | Some("box") => match (kv.f64_list("lo")?, kv.f64_list("hi")?) {
                (Some(lo), Some(hi)) => Domain::Box { lo, hi },
                (None, None) => match kv.get("kind") {
                    Some("disk_valley") => Domain::UnitDisk,
                    Some("circle_sine") => Domain::Circle,
                    Some("gaussian_mixture_bg") => Domain::Box {
                        lo: vec![-1.0, -1.0],
                        hi: vec![1.0, 1.0],
                    },
                    Some("linear") => Domain::centered_square(),
                    _ => Domain::unit_square(),
                },
                _ => return Err(Error::Parse("`lo` and `hi` must be given together".into())),
            },
            Some("unit_disk") => Domain::UnitDisk,
            Some("circle") => Domain::Circle,
            Some(other) => return Err(Error::Parse(format!("unknown domain `{other}`"))),
        };
        let kind = match kv.get("kind").unwrap_or("uniform") {
            "uniform" => DensityKind::Uniform,
            "linear" => DensityKind::Linear {
                slope: kv.f64_or("slope", 1.0)?,
            },
            "disk_valley" => DensityKind::DiskValley { tau: need("tau")? },
            "gaussian_mixture_bg" => {
                let tau = need("tau")?;
                let means = kv.f64_list("means")?.unwrap_or_else(|| vec![-0.5, 0.0, 0.5, 0.0]);
                let d = domain.dim();
                if means.len() % d != 0 {
                    return Err(Error::Parse("`means` length must be a multiple of the dimension".into()));
                }
                let k = means.len() / d;
                let sigmas = kv.f64_list("sigmas")?.unwrap_or_else(|| vec![0.2; k]);
                let weights = kv.f64_list("weights")?.unwrap_or_else(|| vec![1.0 / k as f64; k]);
                if sigmas.len() != k || weights.len() != k {
                    return Err(Error::Parse("mixture lists have inconsistent lengths".into()));
                }
                let components = (0..k)
                    .map(|i| Gaussian {
                        mean: means[i * d..(i + 1) * d].to_vec(),
                        sigma: sigmas[i],
                        weight: weights[i],
                    })
                    .collect();
                DensityKind::GaussianMixtureBg { tau, components }
            }
            "strip_gap" => DensityKind::StripGap {
                ratio: kv.f64_or("ratio", 0.2)?,
                width: kv.f64_or("width", 0.2)?,
                center: kv.f64_or("center", 0.0)?,
            },
            "circle_sine" => DensityKind::CircleSine {
                amplitude: kv.f64_or("amplitude", 0.5)?,
            },
            "custom_grid" => {
                let shape = kv
                    .usize_list("grid_shape")?
                    .ok_or_else(|| Error::Parse("missing key `grid_shape`".into()))?;
                if shape.len() != 2 {
                    return Err(Error::Parse("`grid_shape` must be `nx,ny`".into()));
                }
                let values = kv
                    .f64_list("grid_values")?
                    .ok_or_else(|| Error::Parse("missing key `grid_values`".into()))?;
                DensityKind::CustomGrid {
                    nx: shape[0],
                    ny: shape[1],
                    values,
                }
            }
            other => return Err(Error::Parse(format!("unknown density kind `{other}`"))),
        };
        Self::new(kind, domain)
    }

    fn raw_mass(&self) -> f64 {
        if self.kind == DensityKind::Uniform {
            return self.domain.volume();
        }
        match &self.domain {
            Domain::Box { lo, hi } => {
                let d = lo.len();
                let per_axis = if d <= 2 { NORMALIZATION_NODES } else { 64 };
                let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..d)
                    .map(|k| composite_rule(lo[k], hi[k], &self.breaks(k), per_axis))
                    .collect();
                let mut idx = vec![0usize; d];
                let mut x = vec![0.0; d];
                let mut total = 0.0;
                'outer: loop {
                    let mut w = 1.0;
                    for k in 0..d {
                        x[k] = rules[k].0[idx[k]];
                        w *= rules[k].1[idx[k]];
                    }
                    total += w * self.raw(&x);
                    for k in (0..d).rev() {
                        idx[k] += 1;
                        if idx[k] < rules[k].0.len() {
                            continue 'outer;
                        }
                        idx[k] = 0;
                    }
                    break;
                }
                total
            }
            Domain::UnitDisk => {
                // polar: Gauss–Legendre in r, periodic trapezoid in angle
                let (gx, gw) = gauss_legendre(NORMALIZATION_NODES);
                let na = NORMALIZATION_NODES;
                let mut total = 0.0;
                for (xr, wr) in gx.iter().zip(&gw) {
                    let r = 0.5 * (xr + 1.0);
                    let mut ring = 0.0;
                    for a in 0..na {
                        let th = 2.0 * PI * a as f64 / na as f64;
                        ring += self.raw(&[r * th.cos(), r * th.sin()]);
                    }
                    total += 0.5 * wr * r * ring * (2.0 * PI / na as f64);
                }
                total
            }
            Domain::Circle => {
                let na = NORMALIZATION_NODES;
                (0..na)
                    .map(|a| self.raw(&circle_point(a as f64 / na as f64)))
                    .sum::<f64>()
                    / na as f64
            }
        }
    }

    fn breaks(&self, axis: usize) -> Vec<f64> {
        match (&self.kind, &self.domain) {
            (
                DensityKind::StripGap {
                    width, center, ..
                },
                _,
            ) if axis == 0 => vec![center - 0.5 * width, center + 0.5 * width],
            (DensityKind::CustomGrid { nx, ny, .. }, Domain::Box { lo, hi }) => {
                let cells = if axis == 0 { nx - 1 } else { ny - 1 };
                (1..cells)
                    .map(|i| lo[axis] + (hi[axis] - lo[axis]) * i as f64 / cells as f64)
                    .collect()
            }
            _ => Vec::new(),
        }
    }
}

fn validate(kind: &DensityKind, domain: &Domain) -> Result<()> {
    if let Domain::Box { lo, hi } = domain {
        if lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
            return Err(Error::InvalidModel("box needs lo < hi in every coordinate".into()));
        }
    }
    let bad = |msg: &str| Err(Error::InvalidModel(msg.to_string()));
    match kind {
        DensityKind::Uniform => Ok(()),
        DensityKind::Linear { slope } => match domain {
            Domain::Box { .. } | Domain::UnitDisk if slope.is_finite() => Ok(()),
            _ => bad("linear density needs a box or disk domain and finite slope"),
        },
        DensityKind::DiskValley { tau } => {
            if *domain != Domain::UnitDisk {
                bad("disk_valley lives on the unit disk")
            } else if !(*tau > 0.0) {
                bad("disk_valley needs tau > 0")
            } else {
                Ok(())
            }
        }
        DensityKind::GaussianMixtureBg { tau, components } => {
            let Domain::Box { lo, .. } = domain else {
                return bad("gaussian_mixture_bg lives on a box");
            };
            if !(*tau > 0.0 && *tau <= 1.0) {
                return bad("gaussian_mixture_bg needs tau in (0, 1]");
            }
            if components.is_empty()
                || components
                    .iter()
                    .any(|g| g.mean.len() != lo.len() || !(g.sigma > 0.0) || !(g.weight >= 0.0))
            {
                return bad("mixture components need matching dimension, sigma > 0, weight >= 0");
            }
            Ok(())
        }
        DensityKind::StripGap { ratio, width, .. } => match domain {
            Domain::Box { .. } if *ratio > 0.0 && *width > 0.0 => Ok(()),
            _ => bad("strip_gap needs a box, ratio > 0 and width > 0"),
        },
        DensityKind::CircleSine { amplitude } => {
            if *domain != Domain::Circle {
                bad("circle_sine lives on the circle")
            } else if !(amplitude.abs() < 1.0) {
                bad("circle_sine needs |amplitude| < 1")
            } else {
                Ok(())
            }
        }
        DensityKind::CustomGrid { nx, ny, values } => {
            let Domain::Box { lo, .. } = domain else {
                return bad("custom_grid lives on a 2-D box");
            };
            if lo.len() != 2 || *nx < 2 || *ny < 2 || values.len() != nx * ny {
                return bad("custom_grid needs a 2-D box and nx*ny values with nx, ny >= 2");
            }
            if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return bad("custom_grid values must be positive and finite");
            }
            Ok(())
        }
    }
}

/// Bounds of the raw (unnormalized) shape on the domain.
fn raw_bounds(kind: &DensityKind, domain: &Domain) -> (f64, f64) {
    match kind {
        DensityKind::Uniform => (1.0, 1.0),
        DensityKind::Linear { slope } => {
            let (a, b) = match domain {
                Domain::Box { lo, hi } => (lo[0], hi[0]),
                _ => (-1.0, 1.0),
            };
            let (u, v) = (1.0 + slope * a, 1.0 + slope * b);
            (u.min(v), u.max(v))
        }
        DensityKind::DiskValley { tau } => (1.0 / (tau + 1.0), 1.0 / tau),
        DensityKind::GaussianMixtureBg { tau, components } => {
            let d = domain.dim();
            let vol = domain.volume();
            let peak: f64 = components.iter().map(|g| g.weight * g.peak(d)).sum();
            (tau / vol, tau / vol + (1.0 - tau) * peak)
        }
        DensityKind::StripGap { ratio, .. } => (ratio.min(1.0), ratio.max(1.0)),
        DensityKind::CircleSine { amplitude } => (1.0 - amplitude.abs(), 1.0 + amplitude.abs()),
        DensityKind::CustomGrid { values, .. } => values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))),
    }
}

fn bilinear(nx: usize, ny: usize, values: &[f64], lo: &[f64], hi: &[f64], x: &[f64]) -> f64 {
    let fx = ((x[0] - lo[0]) / (hi[0] - lo[0]) * (nx - 1) as f64).clamp(0.0, (nx - 1) as f64);
    let fy = ((x[1] - lo[1]) / (hi[1] - lo[1]) * (ny - 1) as f64).clamp(0.0, (ny - 1) as f64);
    let i = (fx.floor() as usize).min(nx - 2);
    let j = (fy.floor() as usize).min(ny - 2);
    let (tx, ty) = (fx - i as f64, fy - j as f64);
    let v = |a: usize, b: usize| values[a * ny + b];
    (1.0 - tx) * (1.0 - ty) * v(i, j)
        + tx * (1.0 - ty) * v(i + 1, j)
        + (1.0 - tx) * ty * v(i, j + 1)
        + tx * ty * v(i + 1, j + 1)
}
