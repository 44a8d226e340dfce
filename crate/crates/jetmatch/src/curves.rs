//! Curve generators, the rigid-transformation action, and file ingestion.
//!
//! Analytic generators expose exact derivatives up to order
//! [`MAX_JET_ORDER`]; sampled curves carry grid values on a uniform grid
//! over [0, 1] and are differentiated by finite differences in the jet
//! module. Ingestion rescales any [a, b] parameter domain affinely onto
//! [0, 1] and records the original domain.

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liegroup::Rotation;

/// Highest derivative order analytic generators provide exactly.
pub const MAX_JET_ORDER: usize = 4;

/// Grid resolution used when saving an analytic curve to CSV.
pub const DEFAULT_CSV_SAMPLES: usize = 200;

/// Monotone reparametrization f of [0, 1] with exact derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SpeedProfile {
    /// f(s) = v s
    Linear { v: f64 },
    /// f(s) = sum_j coeffs[j] s^j
    Polynomial { coeffs: Vec<f64> },
    /// f(s) = v s + eps sin(2 pi s); requires |2 pi eps| < v
    SinePerturbed { v: f64, eps: f64 },
}

impl SpeedProfile {
    fn validate(&self) -> Result<()> {
        let ok = match self {
            SpeedProfile::Linear { v } => *v > 0.0,
            SpeedProfile::SinePerturbed { v, eps } => {
                (2.0 * std::f64::consts::PI * eps).abs() < *v
            }
            SpeedProfile::Polynomial { coeffs } => {
                !coeffs.is_empty()
                    && (0..=1000)
                        .map(|i| i as f64 / 1000.0)
                        .all(|s| poly_derivative(coeffs, s, 1) > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NonMonotoneProfile)
        }
    }

    /// order 0 is the value itself.
    pub fn derivative(&self, s: f64, order: usize) -> f64 {
        match self {
            SpeedProfile::Linear { v } => match order {
                0 => v * s,
                1 => *v,
                _ => 0.0,
            },
            SpeedProfile::Polynomial { coeffs } => poly_derivative(coeffs, s, order),
            SpeedProfile::SinePerturbed { v, eps } => {
                let w = 2.0 * std::f64::consts::PI;
                let wave = eps * w.powi(order as i32)
                    * (w * s + order as f64 * std::f64::consts::FRAC_PI_2).sin();
                match order {
                    0 => v * s + wave,
                    1 => v + wave,
                    _ => wave,
                }
            }
        }
    }
}

fn poly_derivative(coeffs: &[f64], s: f64, order: usize) -> f64 {
    let mut acc = 0.0;
    for (m, &c) in coeffs.iter().enumerate().skip(order) {
        let mut factor = c;
        for q in 0..order {
            factor *= (m - q) as f64;
        }
        acc += factor * s.powi((m - order) as i32);
    }
    acc
}

/// Scalar height profile h for graph curves (s, h(s)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GraphProfile {
    /// h(s) = sum_j coeffs[j] s^j
    Polynomial { coeffs: Vec<f64> },
    /// h(s) = amplitude * exp(-((s - center)/width)^2 / 2)
    GaussianBump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl GraphProfile {
    fn validate(&self) -> Result<()> {
        match self {
            GraphProfile::Polynomial { coeffs } if coeffs.is_empty() => Err(
                Error::UnsupportedProfile("empty polynomial".to_string()),
            ),
            GraphProfile::GaussianBump { width, .. } if *width <= 0.0 => Err(
                Error::UnsupportedProfile("gaussian width must be positive".to_string()),
            ),
            _ => Ok(()),
        }
    }

    pub fn derivative(&self, s: f64, order: usize) -> f64 {
        match self {
            GraphProfile::Polynomial { coeffs } => poly_derivative(coeffs, s, order),
            GraphProfile::GaussianBump {
                amplitude,
                center,
                width,
            } => {
                let t = (s - center) / width;
                // d^i/dt^i exp(-t^2/2) = (-1)^i He_i(t) exp(-t^2/2)
                let he = match order {
                    0 => 1.0,
                    1 => t,
                    2 => t * t - 1.0,
                    3 => t * t * t - 3.0 * t,
                    4 => t.powi(4) - 6.0 * t * t + 3.0,
                    _ => unreachable!("jet order is capped at MAX_JET_ORDER"),
                };
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                amplitude * sign * he * (-0.5 * t * t).exp() / width.powi(order as i32)
            }
        }
    }
}

/// An element (g, x) of the Euclidean group acting by c -> g c + x.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidTransform {
    pub rotation: Rotation,
    pub translation: DVector<f64>,
}

impl RigidTransform {
    pub fn new(rotation: Rotation, translation: DVector<f64>) -> Result<Self> {
        if rotation.dim() != translation.len() {
            return Err(Error::DimensionMismatch(format!(
                "rotation is {}x{} but translation has length {}",
                rotation.dim(),
                rotation.dim(),
                translation.len()
            )));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rotation: Rotation::identity(n),
            translation: DVector::zeros(n),
        }
    }

    pub fn apply_point(&self, p: &DVector<f64>) -> DVector<f64> {
        self.rotation.matrix() * p + &self.translation
    }

    /// self after other: (self o other)(p) = self(other(p)).
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation.compose(&other.rotation),
            translation: self.rotation.matrix() * &other.translation + &self.translation,
        }
    }
}

/// A parametrized curve on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    Line {
        direction: DVector<f64>,
        offset: DVector<f64>,
        profile: SpeedProfile,
    },
    Circle {
        radius: f64,
    },
    Graph {
        profile: GraphProfile,
    },
    Sampled {
        values: Vec<DVector<f64>>,
        /// Original parameter domain before rescaling onto [0, 1].
        source_domain: (f64, f64),
    },
    Rigid {
        transform: RigidTransform,
        curve: Box<Curve>,
    },
}

/// c(s) = direction * f(s) + offset with a strictly increasing profile f.
pub fn make_line(
    direction: DVector<f64>,
    offset: DVector<f64>,
    profile: SpeedProfile,
) -> Result<Curve> {
    if direction.len() != offset.len() || direction.is_empty() {
        return Err(Error::DimensionMismatch(
            "line direction and offset must share a positive dimension".to_string(),
        ));
    }
    profile.validate()?;
    Ok(Curve::Line {
        direction,
        offset,
        profile,
    })
}

/// c(s) = r (cos 2 pi s, sin 2 pi s).
pub fn make_circle(radius: f64) -> Result<Curve> {
    if radius > 0.0 {
        Ok(Curve::Circle { radius })
    } else {
        Err(Error::UnsupportedProfile(
            "circle radius must be positive".to_string(),
        ))
    }
}

/// c(s) = (s, h(s)).
pub fn make_graph(profile: GraphProfile) -> Result<Curve> {
    profile.validate()?;
    Ok(Curve::Graph { profile })
}

pub fn make_sampled(values: Vec<DVector<f64>>) -> Result<Curve> {
    if values.len() < 2 {
        return Err(Error::GridTooCoarse(
            "sampled curves need at least two nodes".to_string(),
        ));
    }
    let n = values[0].len();
    if n == 0 || values.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(
            "sampled values must share a positive dimension".to_string(),
        ));
    }
    Ok(Curve::Sampled {
        values,
        source_domain: (0.0, 1.0),
    })
}

/// Transformed curve with exact jets j -> g j; translation only moves values.
pub fn apply_rigid(t: &RigidTransform, c: &Curve) -> Result<Curve> {
    if t.rotation.dim() != c.dim() {
        return Err(Error::DimensionMismatch(format!(
            "transform dimension {} vs curve dimension {}",
            t.rotation.dim(),
            c.dim()
        )));
    }
    Ok(match c {
        Curve::Sampled {
            values,
            source_domain,
        } => Curve::Sampled {
            values: values.iter().map(|v| t.apply_point(v)).collect(),
            source_domain: *source_domain,
        },
        Curve::Rigid { transform, curve } => Curve::Rigid {
            transform: t.compose(transform),
            curve: curve.clone(),
        },
        other => Curve::Rigid {
            transform: t.clone(),
            curve: Box::new(other.clone()),
        },
    })
}

impl Curve {
    pub fn dim(&self) -> usize {
        match self {
            Curve::Line { direction, .. } => direction.len(),
            Curve::Circle { .. } | Curve::Graph { .. } => 2,
            Curve::Sampled { values, .. } => values[0].len(),
            Curve::Rigid { curve, .. } => curve.dim(),
        }
    }

    pub fn is_analytic(&self) -> bool {
        match self {
            Curve::Sampled { .. } => false,
            Curve::Rigid { curve, .. } => curve.is_analytic(),
            _ => true,
        }
    }

    /// Number of grid nodes for sampled curves.
    pub fn sample_count(&self) -> Option<usize> {
        match self {
            Curve::Sampled { values, .. } => Some(values.len()),
            Curve::Rigid { curve, .. } => curve.sample_count(),
            _ => None,
        }
    }

    /// Position at s; sampled curves interpolate linearly between nodes.
    pub fn value(&self, s: f64) -> DVector<f64> {
        match self {
            Curve::Line {
                direction,
                offset,
                profile,
            } => direction * profile.derivative(s, 0) + offset,
            Curve::Circle { radius } => {
                let a = 2.0 * std::f64::consts::PI * s;
                DVector::from_vec(vec![radius * a.cos(), radius * a.sin()])
            }
            Curve::Graph { profile } => {
                DVector::from_vec(vec![s, profile.derivative(s, 0)])
            }
            Curve::Sampled { values, .. } => {
                let nseg = values.len() - 1;
                let x = (s.clamp(0.0, 1.0)) * nseg as f64;
                let i = (x.floor() as usize).min(nseg - 1);
                let t = x - i as f64;
                &values[i] * (1.0 - t) + &values[i + 1] * t
            }
            Curve::Rigid { transform, curve } => transform.apply_point(&curve.value(s)),
        }
    }

    /// Exact derivative of analytic curves, order in 1..=MAX_JET_ORDER.
    pub fn derivative(&self, s: f64, order: usize) -> Result<DVector<f64>> {
        if order == 0 || order > MAX_JET_ORDER {
            return Err(Error::UnsupportedOrder {
                k: order,
                max: MAX_JET_ORDER,
            });
        }
        match self {
            Curve::Line {
                direction, profile, ..
            } => Ok(direction * profile.derivative(s, order)),
            Curve::Circle { radius } => {
                let w = 2.0 * std::f64::consts::PI;
                let phase = w * s + order as f64 * std::f64::consts::FRAC_PI_2;
                let amp = radius * w.powi(order as i32);
                Ok(DVector::from_vec(vec![amp * phase.cos(), amp * phase.sin()]))
            }
            Curve::Graph { profile } => {
                let first = if order == 1 { 1.0 } else { 0.0 };
                Ok(DVector::from_vec(vec![
                    first,
                    profile.derivative(s, order),
                ]))
            }
            Curve::Sampled { .. } => Err(Error::UnsupportedOrder {
                k: order,
                max: 0,
            }),
            Curve::Rigid { transform, curve } => {
                Ok(transform.rotation.matrix() * curve.derivative(s, order)?)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    Json,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum CurveDto {
    Line { params: LineParams },
    Circle { params: CircleParams },
    Graph { params: GraphParams },
    Sampled(SampledParams),
    Rigid { params: RigidParams },
}

#[derive(Serialize, Deserialize)]
struct LineParams {
    a: Vec<f64>,
    b: Vec<f64>,
    profile: SpeedProfile,
}

#[derive(Serialize, Deserialize)]
struct CircleParams {
    r: f64,
}

#[derive(Serialize, Deserialize)]
struct GraphParams {
    profile: GraphProfile,
}

#[derive(Serialize, Deserialize)]
struct SampledParams {
    n: usize,
    values: Vec<Vec<f64>>,
    #[serde(default = "unit_domain", skip_serializing_if = "is_unit_domain")]
    domain: (f64, f64),
}

fn unit_domain() -> (f64, f64) {
    (0.0, 1.0)
}

fn is_unit_domain(d: &(f64, f64)) -> bool {
    *d == (0.0, 1.0)
}

#[derive(Serialize, Deserialize)]
struct RigidParams {
    rotation: Vec<Vec<f64>>,
    translation: Vec<f64>,
    curve: Box<CurveDto>,
}

fn to_dto(c: &Curve) -> CurveDto {
    match c {
        Curve::Line {
            direction,
            offset,
            profile,
        } => CurveDto::Line {
            params: LineParams {
                a: direction.iter().copied().collect(),
                b: offset.iter().copied().collect(),
                profile: profile.clone(),
            },
        },
        Curve::Circle { radius } => CurveDto::Circle {
            params: CircleParams { r: *radius },
        },
        Curve::Graph { profile } => CurveDto::Graph {
            params: GraphParams {
                profile: profile.clone(),
            },
        },
        Curve::Sampled {
            values,
            source_domain,
        } => CurveDto::Sampled(SampledParams {
            n: values[0].len(),
            values: values.iter().map(|v| v.iter().copied().collect()).collect(),
            domain: *source_domain,
        }),
        Curve::Rigid { transform, curve } => {
            let n = transform.rotation.dim();
            let m = transform.rotation.matrix();
            CurveDto::Rigid {
                params: RigidParams {
                    rotation: (0..n)
                        .map(|i| (0..n).map(|j| m[(i, j)]).collect())
                        .collect(),
                    translation: transform.translation.iter().copied().collect(),
                    curve: Box::new(to_dto(curve)),
                },
            }
        }
    }
}

fn from_dto(dto: CurveDto) -> Result<Curve> {
    match dto {
        CurveDto::Line { params } => make_line(
            DVector::from_vec(params.a),
            DVector::from_vec(params.b),
            params.profile,
        ),
        CurveDto::Circle { params } => make_circle(params.r),
        CurveDto::Graph { params } => make_graph(params.profile),
        CurveDto::Sampled(p) => {
            if p.values.iter().any(|v| v.len() != p.n) {
                return Err(Error::MalformedFile(format!(
                    "sampled rows must have length n = {}",
                    p.n
                )));
            }
            let values = p.values.into_iter().map(DVector::from_vec).collect();
            let mut c = make_sampled(values)?;
            if let Curve::Sampled { source_domain, .. } = &mut c {
                *source_domain = p.domain;
            }
            Ok(c)
        }
        CurveDto::Rigid { params } => {
            let n = params.translation.len();
            if params.rotation.len() != n || params.rotation.iter().any(|r| r.len() != n) {
                return Err(Error::MalformedFile(
                    "rigid rotation must be square and match the translation".to_string(),
                ));
            }
            let flat: Vec<f64> = params.rotation.into_iter().flatten().collect();
            let rot = Rotation::try_new(nalgebra::DMatrix::from_row_slice(n, n, &flat))?;
            let t = RigidTransform::new(rot, DVector::from_vec(params.translation))?;
            let inner = from_dto(*params.curve)?;
            apply_rigid(&t, &inner)
        }
    }
}

pub fn curve_to_json(c: &Curve) -> String {
    serde_json::to_string_pretty(&to_dto(c)).expect("curve serialization cannot fail")
}

pub fn curve_from_json(text: &str) -> Result<Curve> {
    let dto: CurveDto =
        serde_json::from_str(text).map_err(|e| Error::MalformedFile(e.to_string()))?;
    from_dto(dto)
}

fn curve_to_csv(c: &Curve) -> String {
    let (rows, n) = match c {
        Curve::Sampled { values, .. } => (values.clone(), values[0].len()),
        _ => {
            let n = c.dim();
            let rows = (0..=DEFAULT_CSV_SAMPLES)
                .map(|m| c.value(m as f64 / DEFAULT_CSV_SAMPLES as f64))
                .collect();
            (rows, n)
        }
    };
    let mut out = String::from("s");
    for j in 1..=n {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    let nseg = rows.len() - 1;
    for (m, row) in rows.iter().enumerate() {
        out.push_str(&format!("{:.16e}", m as f64 / nseg as f64));
        for v in row.iter() {
            out.push_str(&format!(",{v:.16e}"));
        }
        out.push('\n');
    }
    out
}

fn curve_from_csv(text: &str) -> Result<Curve> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::MalformedFile("empty CSV".to_string()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 || cols[0] != "s" {
        return Err(Error::MalformedFile(
            "CSV header must be s,x1,...,xn".to_string(),
        ));
    }
    let n = cols.len() - 1;
    let mut ss = Vec::new();
    let mut values = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n + 1 {
            return Err(Error::MalformedFile(format!(
                "row has {} fields, expected {}",
                fields.len(),
                n + 1
            )));
        }
        let mut nums = fields.iter().map(|f| {
            f.parse::<f64>()
                .map_err(|e| Error::MalformedFile(format!("bad number {f:?}: {e}")))
        });
        ss.push(nums.next().unwrap()?);
        let row: Vec<f64> = nums.collect::<Result<_>>()?;
        values.push(DVector::from_vec(row));
    }
    if ss.len() < 2 {
        return Err(Error::GridTooCoarse(
            "CSV needs at least two rows".to_string(),
        ));
    }
    let a = ss[0];
    let b = *ss.last().unwrap();
    if !(b > a) {
        return Err(Error::NonUniformGrid);
    }
    let h = (b - a) / (ss.len() - 1) as f64;
    let tol = 1e-9 * (b - a).max(1.0);
    for (m, &s) in ss.iter().enumerate() {
        if (s - (a + m as f64 * h)).abs() > tol {
            return Err(Error::NonUniformGrid);
        }
    }
    let mut c = make_sampled(values)?;
    if let Curve::Sampled { source_domain, .. } = &mut c {
        *source_domain = (a, b);
    }
    Ok(c)
}

pub fn save_curve(c: &Curve, path: &Path, format: FileFormat) -> Result<()> {
    let text = match format {
        FileFormat::Json => curve_to_json(c),
        FileFormat::Csv => curve_to_csv(c),
    };
    fs::write(path, text)?;
    Ok(())
}

pub fn load_curve(path: &Path, format: FileFormat) -> Result<Curve> {
    let text = fs::read_to_string(path)?;
    match format {
        FileFormat::Json => curve_from_json(&text),
        FileFormat::Csv => curve_from_csv(&text),
    }
}
