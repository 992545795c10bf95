//! SI quantity newtypes used along the formula chain.
//!
//! Each physical role gets its own type. Same-kind quantities add and
//! subtract; only the products that the radiometry actually needs are
//! defined across kinds (length × length, area × solid angle, radiance ×
//! étendue). Everything is stored in base SI units.
//!
//! Adding a length to a solid angle does not compile:
//!
//! ```compile_fail
//! use pixel_modes::quantities::{Length, SolidAngle};
//! let _ = Length::new(1.0) + SolidAngle::new(1.0);
//! ```
//!
//! Nor can an area be passed where an étendue is expected:
//!
//! ```compile_fail
//! use pixel_modes::quantities::{Area, Radiance};
//! let _ = Radiance::new(1.0) * Area::new(1.0);
//! ```

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

macro_rules! quantity {
    ($(#[$meta:meta])* $name:ident, $unit:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(f64);

        impl $name {
            pub const UNIT: &'static str = $unit;

            pub const fn new(value: f64) -> Self {
                Self(value)
            }

            /// Magnitude in base SI units.
            pub const fn value(self) -> f64 {
                self.0
            }

            pub fn abs(self) -> Self {
                Self(self.0.abs())
            }

            pub fn max(self, other: Self) -> Self {
                Self(self.0.max(other.0))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{} {}", self.0, $unit)
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self(self.0 - rhs.0)
            }
        }

        impl Neg for $name {
            type Output = Self;
            fn neg(self) -> Self {
                Self(-self.0)
            }
        }

        impl Mul<f64> for $name {
            type Output = Self;
            fn mul(self, rhs: f64) -> Self {
                Self(self.0 * rhs)
            }
        }

        impl Mul<$name> for f64 {
            type Output = $name;
            fn mul(self, rhs: $name) -> $name {
                $name(self * rhs.0)
            }
        }

        impl Div<f64> for $name {
            type Output = Self;
            fn div(self, rhs: f64) -> Self {
                Self(self.0 / rhs)
            }
        }

        /// Ratio of two like quantities is a plain number.
        impl Div for $name {
            type Output = f64;
            fn div(self, rhs: Self) -> f64 {
                self.0 / rhs.0
            }
        }
    };
}

quantity!(Length, "m");
quantity!(Area, "m^2");
quantity!(
    /// Plane angle in radians.
    Angle,
    "rad"
);
quantity!(SolidAngle, "sr");
quantity!(
    /// Area–solid-angle throughput.
    Etendue,
    "m^2 sr"
);
quantity!(Temperature, "K");
quantity!(Radiance, "W m^-2 sr^-1");
quantity!(Power, "W");
quantity!(Energy, "J");

impl Length {
    pub fn from_micrometers(um: f64) -> Self {
        Self(um * 1e-6)
    }

    pub fn from_millimeters(mm: f64) -> Self {
        Self(mm * 1e-3)
    }

    pub fn micrometers(self) -> f64 {
        self.0 * 1e6
    }

    pub fn squared(self) -> Area {
        self * self
    }
}

impl Mul for Length {
    type Output = Area;
    fn mul(self, rhs: Length) -> Area {
        Area(self.0 * rhs.0)
    }
}

impl Div<Length> for Area {
    type Output = Length;
    fn div(self, rhs: Length) -> Length {
        Length(self.0 / rhs.0)
    }
}

impl Mul<SolidAngle> for Area {
    type Output = Etendue;
    fn mul(self, rhs: SolidAngle) -> Etendue {
        Etendue(self.0 * rhs.0)
    }
}

impl Mul<Area> for SolidAngle {
    type Output = Etendue;
    fn mul(self, rhs: Area) -> Etendue {
        Etendue(self.0 * rhs.0)
    }
}

impl Div<Area> for Etendue {
    type Output = SolidAngle;
    fn div(self, rhs: Area) -> SolidAngle {
        SolidAngle(self.0 / rhs.0)
    }
}

impl Etendue {
    /// Number of `cell × cell` phase-space cells contained in this étendue.
    ///
    /// The steradian is dimensionless, so the ratio F / λ² is a pure count.
    pub fn cells_of(self, cell: Length) -> f64 {
        (self / cell.squared()).value()
    }
}

impl Mul<Etendue> for Radiance {
    type Output = Power;
    fn mul(self, rhs: Etendue) -> Power {
        Power(self.0 * rhs.0)
    }
}

impl Temperature {
    pub fn kelvin(self) -> f64 {
        self.0
    }
}
