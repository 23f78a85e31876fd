//! Instance generation from presets and explicit grid flags.

use clap::Args;

use wildfire_lbbd::instance::{generate_grid, preset, random_instance, small_preset, Instance};
use wildfire_lbbd::GridSpec;

#[derive(Debug, Clone, Default, Args)]
pub struct GridFlags {
    /// `small:<0-23>`, `large:L<0-7><A|B>` or `random` (tiny non-grid
    /// instance drawn from the seed).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub rows: Option<u32>,
    #[arg(long)]
    pub cols: Option<u32>,
    /// Ignition cell as `row,col`.
    #[arg(long, value_parser = parse_pair::<u32>)]
    pub ignition: Option<(u32, u32)>,
    /// Travel-time bounds `lo,hi` of northward arcs.
    #[arg(long, value_parser = parse_pair::<i64>)]
    pub north: Option<(i64, i64)>,
    #[arg(long, value_parser = parse_pair::<i64>)]
    pub south: Option<(i64, i64)>,
    #[arg(long, value_parser = parse_pair::<i64>)]
    pub east: Option<(i64, i64)>,
    #[arg(long, value_parser = parse_pair::<i64>)]
    pub west: Option<(i64, i64)>,
    /// Arrival-time target.
    #[arg(long)]
    pub psi: Option<i64>,
    /// Delay added by a resource.
    #[arg(long)]
    pub delta: Option<i64>,
    /// Resource times, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub periods: Option<Vec<i64>>,
    /// Resources per period, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub capacity: Option<Vec<u32>>,
    /// Instance id; defaults to the preset name and seed.
    #[arg(long)]
    pub id: Option<String>,
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<T>()
            .map_err(|_| format!("bad number `{v}`"))
    };
    Ok((parse(a)?, parse(b)?))
}

impl GridFlags {
    fn has_overrides(&self) -> bool {
        self.rows.is_some()
            || self.cols.is_some()
            || self.ignition.is_some()
            || self.north.is_some()
            || self.south.is_some()
            || self.east.is_some()
            || self.west.is_some()
            || self.psi.is_some()
            || self.delta.is_some()
            || self.periods.is_some()
            || self.capacity.is_some()
    }

    /// The grid spec: the preset (or small preset 0) with every explicit
    /// flag applied on top.
    pub fn spec(&self) -> Result<GridSpec, String> {
        let mut spec = match &self.preset {
            Some(name) => preset(name, self.seed).map_err(|e| e.to_string())?,
            None => small_preset(0, self.seed).map_err(|e| e.to_string())?,
        };
        if let Some(v) = self.rows {
            spec.rows = v;
        }
        if let Some(v) = self.cols {
            spec.cols = v;
        }
        match self.ignition {
            Some(v) => spec.ignition = v,
            None if self.rows.is_some() || self.cols.is_some() => {
                spec.ignition = (spec.rows / 2, spec.cols / 2)
            }
            None => {}
        }
        for (flag, slot) in [
            (self.north, &mut spec.north),
            (self.south, &mut spec.south),
            (self.east, &mut spec.east),
            (self.west, &mut spec.west),
        ] {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        if let Some(v) = self.psi {
            spec.psi = v;
        }
        if let Some(v) = self.delta {
            spec.delta = v;
        }
        if let Some(v) = &self.periods {
            spec.periods = v.clone();
            if self.capacity.is_none() && spec.capacity.len() != v.len() {
                spec.capacity = vec![spec.capacity.first().copied().unwrap_or(1); v.len()];
            }
        }
        if let Some(v) = &self.capacity {
            spec.capacity = v.clone();
        }
        Ok(spec)
    }

    pub fn instance(&self) -> Result<Instance, String> {
        if self.preset.as_deref() == Some("random") {
            if self.has_overrides() {
                return Err("grid flags do not apply to the random preset".into());
            }
            let inst = random_instance(self.seed);
            return Ok(match &self.id {
                Some(id) => inst.with_id(id.clone()),
                None => inst,
            });
        }
        let spec = self.spec()?;
        let inst = generate_grid(&spec).map_err(|e| e.to_string())?;
        let id = match (&self.id, &self.preset) {
            (Some(id), _) => id.clone(),
            (None, Some(p)) if !self.has_overrides() => {
                format!("{}-s{}", p.replace(':', "-"), self.seed)
            }
            (None, _) => inst.id().to_string(),
        };
        Ok(inst.with_id(id))
    }
}
