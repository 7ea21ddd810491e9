use serde::{Deserialize, Serialize};

use super::BallisticsError;
use crate::geometry::BRACE_DISTANCE;

/// Linear-spring bow. Force grows in proportion to the string's extension
/// past the brace point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BowModel {
    /// Newtons at `rated_draw_length`.
    pub rated_draw_force: f64,
    pub rated_draw_length: f64,
    pub brace_distance: f64,
    pub efficiency: f64,
    /// Kilograms.
    pub arrow_mass: f64,
}

impl Default for BowModel {
    /// 16 lbf at 28 in.
    fn default() -> Self {
        Self {
            rated_draw_force: 71.2,
            rated_draw_length: 0.7112,
            brace_distance: BRACE_DISTANCE,
            efficiency: 0.75,
            arrow_mass: 0.020,
        }
    }
}

impl BowModel {
    pub fn validate(&self) -> Result<(), BallisticsError> {
        let fields = [
            self.rated_draw_force,
            self.rated_draw_length,
            self.brace_distance,
            self.efficiency,
            self.arrow_mass,
        ];
        if fields.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(BallisticsError::InvalidConfig(
                "bow parameters must be finite and positive".into(),
            ));
        }
        if self.efficiency > 1.0 {
            return Err(BallisticsError::InvalidConfig(format!(
                "efficiency {} exceeds 1",
                self.efficiency
            )));
        }
        if self.brace_distance >= self.rated_draw_length {
            return Err(BallisticsError::InvalidConfig(
                "brace distance must be shorter than the rated draw length".into(),
            ));
        }
        Ok(())
    }

    /// N/m.
    pub fn spring_constant(&self) -> f64 {
        self.rated_draw_force / (self.rated_draw_length - self.brace_distance)
    }

    /// Joules stored at `draw_length`.
    pub fn stored_energy(&self, draw_length: f64) -> Result<f64, BallisticsError> {
        self.validate()?;
        if !draw_length.is_finite() || draw_length < self.brace_distance {
            return Err(BallisticsError::InvalidInput(format!(
                "draw length {draw_length} m is below the brace distance {} m",
                self.brace_distance
            )));
        }
        let ext = draw_length - self.brace_distance;
        Ok(0.5 * self.spring_constant() * ext * ext)
    }
}

/// Arrow speed in m/s after releasing at `draw_length`.
pub fn launch_speed(bow: &BowModel, draw_length: f64) -> Result<f64, BallisticsError> {
    let energy = bow.stored_energy(draw_length)?;
    Ok((2.0 * bow.efficiency * energy / bow.arrow_mass).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn brace_point_gives_zero_speed() {
        assert_eq!(launch_speed(&BowModel::default(), 0.22).unwrap(), 0.0);
    }

    #[test]
    fn default_bow_at_65cm() {
        let bow = BowModel::default();
        let k = 71.2 / 0.4912;
        assert!((bow.spring_constant() - k).abs() < 1e-12);
        assert!((bow.spring_constant() - 144.95).abs() < 0.01);
        let e = bow.stored_energy(0.65).unwrap();
        assert!((e - 0.5 * k * 0.43 * 0.43).abs() < 1e-12);
        assert!((e - 13.40).abs() < 0.01);
        let v = launch_speed(&bow, 0.65).unwrap();
        assert!((v - (2.0 * 0.75 * e / 0.020).sqrt()).abs() < 1e-12);
        assert!((v - 31.7).abs() < 0.05, "{v}");
    }

    #[test]
    fn short_draw_is_rejected() {
        assert!(matches!(
            launch_speed(&BowModel::default(), 0.2),
            Err(BallisticsError::InvalidInput(_))
        ));
    }

    #[test]
    fn bad_bows_are_rejected() {
        let base = BowModel::default();
        for bow in [
            BowModel {
                efficiency: 1.2,
                ..base.clone()
            },
            BowModel {
                arrow_mass: 0.0,
                ..base.clone()
            },
            BowModel {
                brace_distance: 0.8,
                ..base.clone()
            },
        ] {
            assert!(matches!(
                bow.validate(),
                Err(BallisticsError::InvalidConfig(_))
            ));
        }
    }

    proptest! {
        #[test]
        fn speed_is_linear_in_extension(ext in 1e-3f64..0.24) {
            let bow = BowModel::default();
            let v1 = launch_speed(&bow, bow.brace_distance + ext).unwrap();
            let v2 = launch_speed(&bow, bow.brace_distance + 2.0 * ext).unwrap();
            prop_assert!((v2 - 2.0 * v1).abs() <= 1e-12 * v2.max(1.0));
        }
    }
}
