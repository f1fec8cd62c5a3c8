//! Mode labels: spatial path, polarization and OAM index.

use std::fmt;

/// Spatial paths of the interferometer.
///
/// `Source` feeds the input splitter whose second port (`Dark`) stays in
/// vacuum; `A`/`B` are the interferometer arms, `C`/`D` the recombiner
/// outputs, and `D1`/`D2` the two detector ports behind the output splitter.
/// `Dark` doubles as the vacuum port of the output splitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathTag {
    Source,
    Dark,
    A,
    B,
    C,
    D,
    D1,
    D2,
}

impl fmt::Display for PathTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PathTag::Source => "src",
            PathTag::Dark => "dark",
            PathTag::A => "a",
            PathTag::B => "b",
            PathTag::C => "c",
            PathTag::D => "d",
            PathTag::D1 => "d1",
            PathTag::D2 => "d2",
        };
        f.write_str(name)
    }
}

/// Linear polarization label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

/// A single optical mode: where the light is, its polarization and its OAM
/// index. The derived total order makes occupation maps canonical.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub path: PathTag,
    pub pol: Polarization,
    pub oam: i32,
}

impl ModeLabel {
    pub fn new(path: PathTag, pol: Polarization, oam: i32) -> Self {
        Self { path, pol, oam }
    }

    /// Same mode with the OAM index shifted by `delta`.
    pub fn with_oam_shift(self, delta: i32) -> Self {
        Self {
            oam: self.oam + delta,
            ..self
        }
    }

    /// Same mode moved to another path.
    pub fn on_path(self, path: PathTag) -> Self {
        Self { path, ..self }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:l={}", self.path, self.pol, self.oam)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_order_is_total_and_stable() {
        let a = ModeLabel::new(PathTag::A, Polarization::H, 0);
        let b = ModeLabel::new(PathTag::A, Polarization::H, 1);
        let c = ModeLabel::new(PathTag::A, Polarization::V, -1);
        let d = ModeLabel::new(PathTag::B, Polarization::H, 0);
        let mut v = vec![d, c, b, a];
        v.sort();
        assert_eq!(v, vec![a, b, c, d]);
    }

    #[test]
    fn oam_shift_and_path_move_compose() {
        let m = ModeLabel::new(PathTag::B, Polarization::H, 1);
        let shifted = m.with_oam_shift(-1).on_path(PathTag::C);
        assert_eq!(shifted, ModeLabel::new(PathTag::C, Polarization::H, 0));
    }

    #[test]
    fn display_is_compact() {
        let m = ModeLabel::new(PathTag::D1, Polarization::V, -2);
        assert_eq!(m.to_string(), "d1:V:l=-2");
    }
}
