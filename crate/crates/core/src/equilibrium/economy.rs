use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::EquilibriumError;

fn default_stages() -> u8 {
    2
}

/// A world of `J` countries producing through two-stage supply chains.
///
/// Field names follow the JSON configuration format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldEconomy {
    #[serde(rename = "J")]
    pub countries: usize,
    /// Equipped labour per country.
    #[serde(rename = "L")]
    pub labor: Vec<f64>,
    /// Stage-1 technology levels.
    #[serde(rename = "T1")]
    pub t1: Vec<f64>,
    /// Stage-2 technology levels.
    #[serde(rename = "T2")]
    pub t2: Vec<f64>,
    /// Iceberg trade costs, `tau[from][to]`.
    pub tau: Vec<Vec<f64>>,
    /// Labour share in stage-2 production.
    pub alpha2: f64,
    /// Fréchet shape.
    pub theta: f64,
    /// CES elasticity across final goods.
    pub sigma: f64,
    /// Labour share in the composite input bundle.
    pub gamma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    /// 2 for two-stage chains; 1 collapses to a single stage.
    #[serde(default = "default_stages")]
    pub stages: u8,
}

impl WorldEconomy {
    /// Symmetric economy with uniform cross-border cost `tau_cross`.
    pub fn symmetric(countries: usize, tau_cross: f64) -> Self {
        WorldEconomy {
            countries,
            labor: vec![1.0; countries],
            t1: vec![1.0; countries],
            t2: vec![1.0; countries],
            tau: (0..countries)
                .map(|i| {
                    (0..countries)
                        .map(|j| if i == j { 1.0 } else { tau_cross })
                        .collect()
                })
                .collect(),
            alpha2: 0.5,
            theta: 4.0,
            sigma: 2.0,
            gamma: 0.5,
            names: None,
            stages: 2,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, EquilibriumError> {
        let econ: WorldEconomy = serde_json::from_str(text)
            .map_err(|e| EquilibriumError::InvalidEconomy(e.to_string()))?;
        econ.validate()?;
        Ok(econ)
    }

    pub fn validate(&self) -> Result<(), EquilibriumError> {
        let bad = |m: String| Err(EquilibriumError::InvalidEconomy(m));
        let j = self.countries;
        if j == 0 {
            return bad("J must be at least 1".into());
        }
        for (name, v) in [("L", &self.labor), ("T1", &self.t1), ("T2", &self.t2)] {
            if v.len() != j {
                return bad(format!("{name} has {} entries, expected {j}", v.len()));
            }
            if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
                return bad(format!("{name} entries must be positive, got {x}"));
            }
        }
        if self.tau.len() != j || self.tau.iter().any(|r| r.len() != j) {
            return bad(format!("tau must be {j}x{j}"));
        }
        for (a, row) in self.tau.iter().enumerate() {
            for (b, &t) in row.iter().enumerate() {
                if a == b && t != 1.0 {
                    return bad(format!("tau[{a}][{a}] must be 1, got {t}"));
                }
                if t.is_nan() || t < 1.0 {
                    return bad(format!("tau[{a}][{b}] must be >= 1, got {t}"));
                }
            }
        }
        if !(self.alpha2 > 0.0 && self.alpha2 < 1.0) {
            return bad(format!("alpha2 must lie in (0, 1), got {}", self.alpha2));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return bad(format!("theta must be positive, got {}", self.theta));
        }
        if !(self.sigma > 1.0 && self.sigma - 1.0 < self.theta) {
            return bad(format!(
                "sigma must satisfy 1 < sigma < 1 + theta, got sigma={} theta={}",
                self.sigma, self.theta
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if let Some(names) = &self.names {
            if names.len() != j {
                return bad(format!("names has {} entries, expected {j}", names.len()));
            }
        }
        if !matches!(self.stages, 1 | 2) {
            return bad(format!("stages must be 1 or 2, got {}", self.stages));
        }
        Ok(())
    }

    /// Stage-2 labour share actually used; a single-stage economy puts all
    /// value added in the last stage.
    pub fn effective_alpha2(&self) -> f64 {
        if self.stages == 1 {
            1.0
        } else {
            self.alpha2
        }
    }

    /// Income weights `α_n β_n` of the two stages.
    pub fn stage_weights(&self) -> [f64; 2] {
        let a2 = self.effective_alpha2();
        [1.0 - a2, a2]
    }

    /// Constant of the Fréchet–CES price integral.
    pub fn kappa(&self) -> f64 {
        gamma((self.theta + 1.0 - self.sigma) / self.theta).powf(1.0 / (1.0 - self.sigma))
    }

    pub fn country_names(&self) -> Vec<String> {
        self.names
            .clone()
            .unwrap_or_else(|| (1..=self.countries).map(|i| format!("C{i}")).collect())
    }

    /// Same economy with every technology level multiplied by `factor`.
    pub fn with_scaled_technology(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.t1.iter_mut().for_each(|t| *t *= factor);
        out.t2.iter_mut().for_each(|t| *t *= factor);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let econ = WorldEconomy::symmetric(2, 1.5);
        let text = serde_json::to_string(&econ).unwrap();
        assert!(text.contains("\"J\":2"));
        assert_eq!(WorldEconomy::from_json(&text).unwrap(), econ);
    }

    #[test]
    fn stages_default_to_two() {
        let text = r#"{"J":1,"L":[1],"T1":[1],"T2":[1],"tau":[[1]],
            "alpha2":0.5,"theta":4,"sigma":2,"gamma":1}"#;
        assert_eq!(WorldEconomy::from_json(text).unwrap().stages, 2);
    }

    #[test]
    fn rejects_bad_economies() {
        let base = WorldEconomy::symmetric(2, 1.5);
        let mut cases = Vec::new();
        let mut e = base.clone();
        e.tau[0][0] = 1.1;
        cases.push(e);
        let mut e = base.clone();
        e.tau[0][1] = 0.9;
        cases.push(e);
        cases.push(WorldEconomy {
            sigma: 5.5,
            ..base.clone()
        });
        cases.push(WorldEconomy {
            alpha2: 1.0,
            ..base.clone()
        });
        cases.push(WorldEconomy {
            gamma: 0.0,
            ..base.clone()
        });
        cases.push(WorldEconomy {
            labor: vec![1.0],
            ..base.clone()
        });
        cases.push(WorldEconomy {
            stages: 3,
            ..base.clone()
        });
        for c in cases {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn kappa_matches_gamma_function() {
        let e = WorldEconomy {
            theta: 4.0,
            sigma: 2.0,
            ..WorldEconomy::symmetric(1, 1.0)
        };
        let expected = gamma(0.75).powf(-1.0);
        assert!((e.kappa() - expected).abs() < 1e-14);
    }
}
