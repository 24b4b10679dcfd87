use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A closed range of joint angles in degrees. `lo <= hi` always holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleInterval {
    lo: f64,
    hi: f64,
}

impl AngleInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        Self::checked(lo, hi, "interval")
    }

    pub(crate) fn checked(lo: f64, hi: f64, path: &str) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::schema(path, "interval bounds must be finite"));
        }
        if lo > hi {
            return Err(Error::Interval {
                path: path.to_string(),
                lo,
                hi,
            });
        }
        Ok(AngleInterval { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.lo <= angle && angle <= self.hi
    }

    /// Length of `self ∩ other`, zero when disjoint.
    pub fn overlap(&self, other: &AngleInterval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    /// Signed distance from the interval: positive above `hi`, negative
    /// below `lo`, zero inside.
    pub fn excess(&self, angle: f64) -> f64 {
        if angle > self.hi {
            angle - self.hi
        } else if angle < self.lo {
            angle - self.lo
        } else {
            0.0
        }
    }
}

impl Serialize for AngleInterval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.lo, self.hi].serialize(serializer)
    }
}

/// Deserializes without the ordering check; callers validate with a path.
impl<'de> Deserialize<'de> for AngleInterval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = <[f64; 2]>::deserialize(deserializer)?;
        Ok(AngleInterval { lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_reversed_bounds() {
        assert!(matches!(
            AngleInterval::new(61.0, 0.0),
            Err(Error::Interval { .. })
        ));
        assert!(AngleInterval::new(f64::NAN, 0.0).is_err());
        assert_eq!(AngleInterval::new(3.0, 3.0).unwrap().length(), 0.0);
    }

    #[test]
    fn overlap_and_excess() {
        let ours = AngleInterval::new(-15.0, 82.0).unwrap();
        let human = AngleInterval::new(0.0, 90.0).unwrap();
        assert_eq!(ours.overlap(&human), 82.0);
        assert_eq!(human.overlap(&ours), 82.0);
        let far = AngleInterval::new(100.0, 110.0).unwrap();
        assert_eq!(ours.overlap(&far), 0.0);
        assert_eq!(ours.excess(85.0), 3.0);
        assert_eq!(ours.excess(-20.0), -5.0);
        assert_eq!(ours.excess(10.0), 0.0);
    }
}
