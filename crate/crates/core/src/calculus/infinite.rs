use super::{Map, NearIdentityMap};
use crate::error::{Error, Result};
use crate::grid::{GridSection, GridSpec};
use crate::par;

#[derive(Debug, Clone)]
pub struct InfiniteComposition {
    /// `φ_0 ∘ φ_1 ∘ … ∘ φ_N` on the target grid.
    pub map: NearIdentityMap,
    /// `‖ψ_n − ψ_{n−1}‖_0` for `n = 1..=N`, `ψ_n = φ_0 ∘ … ∘ φ_n`.
    pub increments: Vec<f64>,
}

/// Composes `maps[0] ∘ maps[1] ∘ …` on `target`. Each point is pushed through
/// the maps from the last to the first; every intermediate image must stay
/// in the domain of the next map (the domain chain).
pub fn infinite_compose(maps: &[NearIdentityMap], target: &GridSpec) -> Result<InfiniteComposition> {
    let m = target.dim();
    if maps.iter().any(|p| p.dim() != m) {
        return Err(Error::Dimension("maps of different dimensions".into()));
    }
    let n = maps.len();
    // prefixes[i][node] = ψ_i(node) − node for i = 0..n
    let per_node = par::try_map_range(target.len(), |node| {
        let x = target.node(node);
        let mut rows = Vec::with_capacity(n);
        let mut y = vec![0.0; m];
        for last in 0..n {
            let mut p = x.clone();
            for phi in maps[..=last].iter().rev() {
                phi.apply(&p, &mut y).map_err(|e| match e {
                    Error::Domain(s) => Error::Domain(format!("domain chain broken: {s}")),
                    other => other,
                })?;
                p.copy_from_slice(&y);
            }
            rows.push(p.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<f64>>());
        }
        Ok(rows)
    })?;
    let mut increments = Vec::new();
    for i in 1..n {
        let d = per_node
            .iter()
            .map(|rows| rows[i].iter().zip(&rows[i - 1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        increments.push(d);
    }
    let last: Vec<f64> = if n == 0 {
        vec![0.0; target.len() * m]
    } else {
        per_node.iter().flat_map(|rows| rows[n - 1].clone()).collect()
    };
    Ok(InfiniteComposition { map: NearIdentityMap::new(GridSection::new(target.clone(), m, last)?)?, increments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Box;

    #[test]
    fn translations_telescope() {
        let c = [0.3, -0.2];
        let maps: Vec<NearIdentityMap> = (0..12)
            .map(|nu| {
                let spec = GridSpec::uniform(Box::cube(2, 1.0 + 0.5f64.powi(nu)), 9).unwrap();
                let s = 0.5f64.powi(nu + 1);
                NearIdentityMap::from_displacement(spec, move |_, o| {
                    o[0] = s * c[0];
                    o[1] = s * c[1];
                })
            })
            .collect();
        let target = GridSpec::uniform(Box::cube(2, 0.5), 5).unwrap();
        let res = infinite_compose(&maps, &target).unwrap();
        let total = 1.0 - 0.5f64.powi(12);
        for i in 0..target.len() {
            let d = res.map.disp.at_node(i);
            assert!((d[0] - total * c[0]).abs() < 1e-14 && (d[1] - total * c[1]).abs() < 1e-14);
        }
        for w in res.increments.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_and_broken_chain() {
        let spec = GridSpec::uniform(Box::cube(1, 1.0), 11).unwrap();
        let ids = vec![NearIdentityMap::identity(spec.clone()); 3];
        let res = infinite_compose(&ids, &spec).unwrap();
        assert_eq!(res.map.disp.max_abs(), 0.0);
        let push = NearIdentityMap::from_displacement(spec.clone(), |_, o| o[0] = 0.2);
        let small = NearIdentityMap::identity(GridSpec::uniform(Box::cube(1, 0.9), 11).unwrap());
        assert!(matches!(infinite_compose(&[small, push], &spec), Err(Error::Domain(_))));
    }
}
