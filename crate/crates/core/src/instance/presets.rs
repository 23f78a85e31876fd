//! Benchmark presets: 24 small grids and 16 large ones.

use super::{invalid, GridSpec, InstanceError};

/// Travel-time bounds `(north, south, east, west)` for the eight landscape
/// variants. Southward spread is fastest in every variant.
pub const TRAVEL_TIME_ROWS: [[(i64, i64); 4]; 8] = [
    [(7, 9), (2, 4), (4, 6), (6, 8)],
    [(7, 9), (1, 3), (4, 6), (6, 8)],
    [(7, 9), (2, 4), (3, 5), (6, 8)],
    [(7, 9), (1, 3), (3, 5), (6, 8)],
    [(7, 9), (2, 4), (4, 6), (4, 6)],
    [(7, 9), (1, 3), (4, 6), (4, 6)],
    [(7, 9), (2, 4), (3, 5), (3, 5)],
    [(7, 9), (1, 3), (3, 5), (3, 5)],
];

/// Resource schedule variants of the large presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LargeKind {
    /// Three resources at t = 10, 20, 30, 40; delay 50.
    A,
    /// Three resources at t = 10, 20, ..., 60; delay 30.
    B,
}

impl std::str::FromStr for LargeKind {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            other => Err(invalid("type", format!("expected A or B, got `{other}`"))),
        }
    }
}

fn grid_spec(row: usize, size: u32, ignition: u32, seed: u64) -> GridSpec {
    let [north, south, east, west] = TRAVEL_TIME_ROWS[row];
    GridSpec {
        rows: size,
        cols: size,
        ignition: (ignition, ignition),
        north,
        south,
        east,
        west,
        seed,
        psi: 28,
        delta: 50,
        periods: vec![10, 15],
        capacity: vec![3, 3],
    }
}

/// Small preset `id` in `0..24`: ids 0-7 are 10x10 grids, 8-15 are 20x20 and
/// 16-23 are 30x30, each cycling through [`TRAVEL_TIME_ROWS`].
pub fn small_preset(id: usize, seed: u64) -> Result<GridSpec, InstanceError> {
    let (size, ignition) = match id / 8 {
        0 => (10, 5),
        1 => (20, 10),
        2 => (30, 15),
        _ => return Err(InstanceError::UnknownPreset(format!("small:{id}"))),
    };
    Ok(grid_spec(id % 8, size, ignition, seed))
}

/// Applies the large-preset schedule `kind` to `base`, keeping its grid
/// and travel-time distributions.
pub fn generate_large(base: &GridSpec, kind: LargeKind) -> GridSpec {
    let mut spec = base.clone();
    spec.psi = 70;
    match kind {
        LargeKind::A => {
            spec.delta = 50;
            spec.periods = vec![10, 20, 30, 40];
        }
        LargeKind::B => {
            spec.delta = 30;
            spec.periods = vec![10, 20, 30, 40, 50, 60];
        }
    }
    spec.capacity = vec![3; spec.periods.len()];
    spec
}

/// Large preset `L{row}{kind}`: a 20x20 grid ignited at (10, 10).
pub fn large_preset(row: usize, kind: LargeKind, seed: u64) -> Result<GridSpec, InstanceError> {
    if row >= TRAVEL_TIME_ROWS.len() {
        return Err(InstanceError::UnknownPreset(format!("large:L{row}")));
    }
    Ok(generate_large(&grid_spec(row, 20, 10, seed), kind))
}

/// Parses `small:<0..23>` or `large:L<0..7><A|B>`.
pub fn preset(name: &str, seed: u64) -> Result<GridSpec, InstanceError> {
    let unknown = || InstanceError::UnknownPreset(name.to_string());
    if let Some(id) = name.strip_prefix("small:") {
        let id: usize = id.parse().map_err(|_| unknown())?;
        return small_preset(id, seed);
    }
    if let Some(rest) = name.strip_prefix("large:") {
        let rest = rest.strip_prefix('L').ok_or_else(unknown)?;
        if rest.len() != 2 {
            return Err(unknown());
        }
        let row: usize = rest[..1].parse().map_err(|_| unknown())?;
        let kind: LargeKind = rest[1..].parse().map_err(|_| unknown())?;
        return large_preset(row, kind, seed);
    }
    Err(unknown())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_schedules() {
        let a = preset("large:L0A", 1).unwrap();
        let b = preset("large:L0B", 1).unwrap();
        assert_eq!(a.capacity.iter().sum::<u32>(), 12);
        assert_eq!(b.capacity.iter().sum::<u32>(), 18);
        assert_eq!((a.psi, b.psi), (70, 70));
        assert_eq!((a.delta, b.delta), (50, 30));
        assert_eq!(b.periods, vec![10, 20, 30, 40, 50, 60]);
        assert_eq!((a.rows, a.ignition), (20, (10, 10)));
    }

    #[test]
    fn small_sizes_and_rows() {
        let s = preset("small:13", 4).unwrap();
        assert_eq!((s.rows, s.cols, s.ignition), (20, 20, (10, 10)));
        assert_eq!(s.south, (1, 3));
        assert_eq!(s.east, (4, 6));
        let s = preset("small:23", 4).unwrap();
        assert_eq!((s.rows, s.ignition), (30, (15, 15)));
        assert_eq!(s.west, (3, 5));
    }

    #[test]
    fn unknown_presets() {
        for bad in [
            "small:24",
            "small:x",
            "large:L8A",
            "large:L0C",
            "large:0A",
            "medium:1",
        ] {
            assert!(preset(bad, 1).is_err(), "{bad}");
        }
    }
}
