use serde::{Deserialize, Serialize};

/// One value for each of the three interacting fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerBeam<T> {
    pub pump: T,
    pub signal: T,
    pub idler: T,
}

impl<T> PerBeam<T> {
    pub const fn new(pump: T, signal: T, idler: T) -> Self {
        Self {
            pump,
            signal,
            idler,
        }
    }

    pub fn map<U>(self, mut f: impl FnMut(T) -> U) -> PerBeam<U> {
        PerBeam {
            pump: f(self.pump),
            signal: f(self.signal),
            idler: f(self.idler),
        }
    }

    pub fn as_ref(&self) -> PerBeam<&T> {
        PerBeam {
            pump: &self.pump,
            signal: &self.signal,
            idler: &self.idler,
        }
    }

    pub fn zip<U>(self, other: PerBeam<U>) -> PerBeam<(T, U)> {
        PerBeam {
            pump: (self.pump, other.pump),
            signal: (self.signal, other.signal),
            idler: (self.idler, other.idler),
        }
    }

    /// Exchange the signal and idler entries.
    pub fn swap_signal_idler(self) -> Self {
        Self {
            pump: self.pump,
            signal: self.idler,
            idler: self.signal,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        [&self.pump, &self.signal, &self.idler].into_iter()
    }
}

impl<T: Copy> PerBeam<T> {
    pub const fn splat(v: T) -> Self {
        Self {
            pump: v,
            signal: v,
            idler: v,
        }
    }
}

impl PerBeam<f64> {
    pub fn product(&self) -> f64 {
        self.pump * self.signal * self.idler
    }
}
