use serde::Serialize;

use s1phase_core::extrapolate::{richardson, Extrapolation};
use s1phase_core::minimizer::EpsilonResult;
use s1phase_core::EnergyBreakdown;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub epsilon: f64,
    pub total: f64,
    pub bulk: f64,
    pub phase_field: f64,
}

impl CurvePoint {
    pub fn new(epsilon: f64, e: &EnergyBreakdown) -> Self {
        Self {
            epsilon,
            total: e.total,
            bulk: e.bulk,
            phase_field: e.phase_field,
        }
    }
}

/// Minimized energies over a decreasing `epsilon` list and their limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyCurve {
    pub tag: String,
    pub points: Vec<CurvePoint>,
    /// Linear fit through the last three points; absent with fewer points.
    pub extrapolation: Option<Extrapolation>,
    pub target: Option<f64>,
    pub target_tag: Option<String>,
}

impl EnergyCurve {
    pub fn new(tag: impl Into<String>, points: Vec<CurvePoint>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].epsilon < w[0].epsilon)) {
            return Err(CliError::Config("curve epsilons must be strictly decreasing".into()));
        }
        let extrapolation = if points.len() >= 3 {
            let eps: Vec<f64> = points.iter().map(|p| p.epsilon).collect();
            let tot: Vec<f64> = points.iter().map(|p| p.total).collect();
            Some(richardson(&eps, &tot)?)
        } else {
            None
        };
        Ok(Self {
            tag: tag.into(),
            points,
            extrapolation,
            target: None,
            target_tag: None,
        })
    }

    pub fn from_stages(tag: impl Into<String>, stages: &[EpsilonResult]) -> Result<Self> {
        Self::new(tag, stages.iter().map(|s| CurvePoint::new(s.epsilon, &s.energy)).collect())
    }

    pub fn with_target(mut self, tag: impl Into<String>, value: f64) -> Self {
        self.target = Some(value);
        self.target_tag = Some(tag.into());
        self
    }

    pub fn limit(&self) -> Option<f64> {
        self.extrapolation.map(|e| e.limit)
    }

    /// `(limit - target) / |target|`, when both exist.
    pub fn relative_error(&self) -> Option<f64> {
        Some((self.limit()? - self.target?) / self.target?.abs())
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.epsilon).collect()
    }

    pub fn totals(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.total).collect()
    }

    pub fn series(&self) -> crate::svg::Series {
        crate::svg::Series {
            label: self.tag.clone(),
            points: self.points.iter().map(|p| (p.epsilon, p.total)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(epsilon: f64, total: f64) -> CurvePoint {
        CurvePoint {
            epsilon,
            total,
            bulk: total,
            phase_field: 0.0,
        }
    }

    #[test]
    fn extrapolates_with_three_points() {
        let c = EnergyCurve::new("x", vec![pt(0.1, 1.1), pt(0.05, 1.05), pt(0.025, 1.025)])
            .unwrap()
            .with_target("one", 1.0);
        assert!((c.limit().unwrap() - 1.0).abs() < 1e-12);
        assert!(c.relative_error().unwrap().abs() < 1e-12);
    }

    #[test]
    fn no_extrapolation_below_three() {
        let c = EnergyCurve::new("x", vec![pt(0.1, 1.0), pt(0.05, 1.0)]).unwrap();
        assert!(c.extrapolation.is_none());
        assert!(c.relative_error().is_none());
    }

    #[test]
    fn rejects_unsorted() {
        assert!(EnergyCurve::new("x", vec![pt(0.05, 1.0), pt(0.1, 1.0)]).is_err());
    }
}
