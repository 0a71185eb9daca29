//! Initial data: `const:x`, `lin:a,b` (`a + b s`), `cos:k[,phase]`
//! (`cos(k s + phase)`), `rand:amp` (uniform in `[-amp, amp]`, seeded), or a
//! path to an `edge_id,s,value` table. `s` is the offset of the state's
//! canonical point.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discretization::{Grid, GridFunction};
use crate::error::{Error, Result};
use crate::io::tables::read_grid_function;

fn numbers(kind: &str, args: &str, min: usize, max: usize) -> Result<Vec<f64>> {
    let parsed = args
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Config(format!("`{kind}:` expects numbers, got `{args}`")))?;
    if parsed.len() < min || parsed.len() > max || parsed.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!(
            "`{kind}:` expects {min}..={max} finite numbers, got `{args}`"
        )));
    }
    Ok(parsed)
}

pub fn parse_init(spec: &str, grid: &Grid, seed: u64) -> Result<GridFunction> {
    let Some((kind, args)) = spec.split_once(':') else {
        return read_grid_function(grid, Path::new(spec));
    };
    match kind {
        "const" => {
            let a = numbers(kind, args, 1, 1)?;
            Ok(GridFunction::constant(grid.len(), a[0]))
        }
        "lin" => {
            let a = numbers(kind, args, 2, 2)?;
            Ok(GridFunction::from_points(grid, |p| a[0] + a[1] * p.s))
        }
        "cos" => {
            let a = numbers(kind, args, 1, 2)?;
            let phase = a.get(1).copied().unwrap_or(0.0);
            Ok(GridFunction::from_points(grid, |p| (a[0] * p.s + phase).cos()))
        }
        "rand" => {
            let a = numbers(kind, args, 1, 1)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let amp = a[0].abs();
            Ok(GridFunction::new(
                (0..grid.len()).map(|_| rng.gen_range(-amp..=amp)).collect(),
            ))
        }
        _ => read_grid_function(grid, Path::new(spec)),
    }
}
