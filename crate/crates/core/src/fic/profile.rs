//! Effort profiles. Each profile is an odd, continuous map from error to
//! effort and is selected by name through [`ProfileRegistry`].

use std::fmt::Debug;

use crate::error::{Error, Result};

/// Error fraction of `x_b` where the tanh profile leaves its linear branch.
pub const TANH_KNEE: f64 = 0.95;
/// Width of the tanh transition, as a fraction of `x_b`.
pub const TANH_WIDTH: f64 = 0.1353;

pub trait ForceProfile: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Effort magnitude for a non-negative error magnitude.
    fn magnitude(&self, err: f64) -> f64;

    /// Upper bound on the effort magnitude.
    fn saturation(&self) -> f64;

    fn force(&self, err: f64) -> f64 {
        if err == 0.0 {
            0.0
        } else {
            err.signum() * self.magnitude(err.abs())
        }
    }
}

/// Constructor parameters shared by all registered profiles. Each profile
/// reads only the fields it needs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProfileParams {
    pub k0: f64,
    pub f_max: f64,
    pub x_b: f64,
    pub f_mid: f64,
    pub x_1: f64,
    pub x_2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSaturated {
    k0: f64,
    f_max: f64,
}

impl LinearSaturated {
    pub const NAME: &'static str = "linear-saturated";

    pub fn new(k0: f64, f_max: f64) -> Result<Self> {
        if !(k0 >= 0.0 && k0.is_finite()) {
            return Err(Error::InvalidProfile(format!("K0 = {k0} must be >= 0")));
        }
        if !(f_max > 0.0 && f_max.is_finite()) {
            return Err(Error::InvalidProfile(format!("F_max = {f_max} must be > 0")));
        }
        Ok(Self { k0, f_max })
    }

    /// Zero-stiffness profile; only exercises the FIC phase logic.
    pub const fn idle() -> Self {
        Self { k0: 0.0, f_max: 1.0 }
    }

    pub fn stiffness(&self) -> f64 {
        self.k0
    }
}

impl ForceProfile for LinearSaturated {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn magnitude(&self, err: f64) -> f64 {
        (self.k0 * err).min(self.f_max)
    }

    fn saturation(&self) -> f64 {
        self.f_max
    }
}

/// Linear spring that blends into a tanh saturation at 0.95·x_b.
///
/// Beyond the knee the effort is `F0 + ΔF·tanh((e − 0.95·x_b)/(0.1353·x_b))`
/// with `F0 = 0.95·K0·x_b` and `ΔF = F_max − F0`, so the curve is continuous
/// at the knee and tends to `F_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TanhSaturated {
    k0: f64,
    f_max: f64,
    x_b: f64,
}

impl TanhSaturated {
    pub const NAME: &'static str = "tanh-saturated";

    pub fn new(k0: f64, f_max: f64, x_b: f64) -> Result<Self> {
        if !(x_b > 0.0 && x_b.is_finite()) {
            return Err(Error::InvalidProfile(format!("x_b = {x_b} must be > 0")));
        }
        LinearSaturated::new(k0, f_max)?;
        // relative slack so that K0 = F_max/x_b itself is accepted
        if k0 * x_b > f_max * (1.0 + 1e-12) {
            return Err(Error::InvalidProfile(format!(
                "K0 = {k0} exceeds F_max/x_b = {}",
                f_max / x_b
            )));
        }
        Ok(Self { k0, f_max, x_b })
    }

    pub fn knee_force(&self) -> f64 {
        TANH_KNEE * self.k0 * self.x_b
    }
}

impl ForceProfile for TanhSaturated {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn magnitude(&self, err: f64) -> f64 {
        let knee = TANH_KNEE * self.x_b;
        if err <= knee {
            self.k0 * err
        } else {
            let f0 = self.knee_force();
            f0 + (self.f_max - f0) * ((err - knee) / (TANH_WIDTH * self.x_b)).tanh()
        }
    }

    fn saturation(&self) -> f64 {
        self.f_max
    }
}

/// Ramp to `f_mid` at `x_1`, hold until `x_2`, ramp to `f_max` at `2·x_2`,
/// hold thereafter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPlateau {
    f_mid: f64,
    f_max: f64,
    x_1: f64,
    x_2: f64,
}

impl TwoPlateau {
    pub const NAME: &'static str = "two-plateau";

    pub fn new(f_mid: f64, f_max: f64, x_1: f64, x_2: f64) -> Result<Self> {
        if !(x_1 > 0.0 && x_1 < x_2 && x_2.is_finite()) {
            return Err(Error::InvalidProfile(format!(
                "breakpoints must satisfy 0 < x_1 < x_2 (got {x_1}, {x_2})"
            )));
        }
        if !(f_max > 0.0 && f_max.is_finite()) {
            return Err(Error::InvalidProfile(format!("F_max = {f_max} must be > 0")));
        }
        if !(0.0..=f_max).contains(&f_mid) {
            return Err(Error::InvalidProfile(format!(
                "plateau effort {f_mid} must lie in [0, F_max = {f_max}]"
            )));
        }
        Ok(Self {
            f_mid,
            f_max,
            x_1,
            x_2,
        })
    }

    pub fn plateau(&self) -> f64 {
        self.f_mid
    }
}

impl ForceProfile for TwoPlateau {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn magnitude(&self, err: f64) -> f64 {
        if err <= self.x_1 {
            self.f_mid * err / self.x_1
        } else if err <= self.x_2 {
            self.f_mid
        } else if err <= 2.0 * self.x_2 {
            self.f_mid + (self.f_max - self.f_mid) * (err - self.x_2) / self.x_2
        } else {
            self.f_max
        }
    }

    fn saturation(&self) -> f64 {
        self.f_max
    }
}

type Builder = fn(&ProfileParams) -> Result<Box<dyn ForceProfile>>;

/// Name-indexed table of profile constructors.
pub struct ProfileRegistry {
    entries: Vec<(&'static str, Builder)>,
}

impl ProfileRegistry {
    pub fn empty() -> Self {
        Self {
            entries: Vec::new(),
        }
    }

    /// Registry holding the three built-in profiles.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(LinearSaturated::NAME, |p| {
            Ok(Box::new(LinearSaturated::new(p.k0, p.f_max)?))
        });
        r.register(TanhSaturated::NAME, |p| {
            Ok(Box::new(TanhSaturated::new(p.k0, p.f_max, p.x_b)?))
        });
        r.register(TwoPlateau::NAME, |p| {
            Ok(Box::new(TwoPlateau::new(p.f_mid, p.f_max, p.x_1, p.x_2)?))
        });
        r
    }

    /// Registers a constructor; a later registration under the same name wins.
    pub fn register(&mut self, name: &'static str, build: Builder) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, build));
    }

    pub fn build(&self, name: &str, params: &ProfileParams) -> Result<Box<dyn ForceProfile>> {
        let (_, build) = self
            .entries
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "force profile",
                name: name.to_string(),
                known: self.names().join(", "),
            })?;
        build(params)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}

impl Default for ProfileRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tanh() -> TanhSaturated {
        TanhSaturated::new(500.0, 50.0, 0.05).unwrap()
    }

    #[test]
    fn linear_region() {
        let p = LinearSaturated::new(100.0, 20.0).unwrap();
        assert!((p.force(0.05) - 5.0).abs() < 1e-12);
        assert_eq!(p.force(1.0), 20.0);
        assert_eq!(p.force(-1.0), -20.0);
    }

    #[test]
    fn tanh_knee_is_continuous() {
        let p = tanh();
        let knee = TANH_KNEE * 0.05;
        assert!((p.force(knee) - 0.95 * 500.0 * 0.05).abs() < 1e-12);
        assert!((p.force(knee + 1e-12) - p.force(knee)).abs() < 1e-8);
    }

    #[test]
    fn tanh_tends_to_saturation() {
        let p = tanh();
        assert!((p.force(10.0) - 50.0).abs() < 1e-12);
        assert!(p.force(1e3) <= 50.0);
    }

    #[test]
    fn tanh_rejects_stiffness_above_bound() {
        assert!(TanhSaturated::new(1001.0, 50.0, 0.05).is_err());
        assert!(TanhSaturated::new(1000.0, 50.0, 0.05).is_ok());
    }

    #[test]
    fn two_plateau_levels() {
        let p = TwoPlateau::new(2.0, 5.0, 0.01, 0.05).unwrap();
        assert_eq!(p.force(0.0), 0.0);
        assert!((p.force(0.005) - 1.0).abs() < 1e-12);
        for e in [0.01, 0.03, 0.05] {
            assert_eq!(p.force(e), 2.0);
        }
        assert!((p.force(0.075) - 3.5).abs() < 1e-12);
        assert_eq!(p.force(0.1), 5.0);
        assert_eq!(p.force(-0.2), -5.0);
    }

    #[test]
    fn two_plateau_validation() {
        assert!(TwoPlateau::new(2.0, 5.0, 0.05, 0.01).is_err());
        assert!(TwoPlateau::new(6.0, 5.0, 0.01, 0.05).is_err());
        assert!(TwoPlateau::new(2.0, 0.0, 0.01, 0.05).is_err());
    }

    #[test]
    fn registry_builds_by_name() {
        let r = ProfileRegistry::builtin();
        let params = ProfileParams {
            k0: 100.0,
            f_max: 20.0,
            ..Default::default()
        };
        let p = r.build("linear-saturated", &params).unwrap();
        assert_eq!(p.name(), "linear-saturated");
        let err = r.build("cubic", &params).unwrap_err().to_string();
        assert!(err.contains("cubic") && err.contains("tanh-saturated"), "{err}");
    }

    fn profiles() -> Vec<Box<dyn ForceProfile>> {
        vec![
            Box::new(LinearSaturated::new(100.0, 20.0).unwrap()),
            Box::new(tanh()),
            Box::new(TwoPlateau::new(2.0, 5.0, 0.01, 0.05).unwrap()),
        ]
    }

    #[test]
    fn profiles_are_continuous_and_odd() {
        for p in profiles() {
            let n = 10_000;
            let span = 0.3;
            let mut prev = p.force(-span);
            let mut max_jump = 0.0f64;
            for i in 1..=n {
                let e = -span + 2.0 * span * i as f64 / n as f64;
                let f = p.force(e);
                max_jump = max_jump.max((f - prev).abs());
                prev = f;
                assert_eq!(p.force(-e), -f, "{} not odd at {e}", p.name());
            }
            // the steepest ramp over one grid cell bounds any honest jump
            let cell = 2.0 * span / n as f64;
            let steepest = match p.name() {
                "linear-saturated" => 100.0,
                // K0 = 500 is below F_max/x_b, so the tanh branch is steeper
                "tanh-saturated" => (50.0 - 0.95 * 500.0 * 0.05) / (TANH_WIDTH * 0.05),
                _ => 2.0 / 0.01,
            };
            assert!(max_jump <= steepest * cell + 1e-9 * p.saturation(), "{}", p.name());
        }
    }

    proptest! {
        #[test]
        fn effort_bounded_by_saturation(e in -10.0f64..10.0) {
            for p in profiles() {
                prop_assert!(p.force(e).abs() <= p.saturation());
            }
        }
    }
}
