//! Residual degrees of freedom under absorbed fixed effects.

use super::demean::{FeGroups, GroupIndex};
use crate::error::{Error, Result};

/// Connected components of the bipartite graph whose edges are the rows
/// linking a level of `a` to a level of `b`.
pub fn connected_components(a: &GroupIndex, b: &GroupIndex) -> usize {
    let na = a.n_groups();
    let mut parent: Vec<usize> = (0..na + b.n_groups()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (&ga, &gb) in a.ids().iter().zip(b.ids()) {
        let ra = find(&mut parent, ga as usize);
        let rb = find(&mut parent, na + gb as usize);
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..parent.len()).filter(|&i| find(&mut parent, i) == i).count()
}

/// Level counts and the number of parameters the fixed effects absorb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Absorption {
    pub levels: Vec<usize>,
    pub components: Option<usize>,
    pub absorbed: usize,
    pub singletons: usize,
}

/// One dimension absorbs L1; two absorb L1 + L2 - C; a third adds L3 - 1.
pub fn absorption(groups: &FeGroups) -> Absorption {
    let dims = groups.dims();
    let levels: Vec<usize> = dims.iter().map(GroupIndex::n_groups).collect();
    let singletons = dims.iter().map(GroupIndex::singletons).sum();
    let components = (dims.len() >= 2).then(|| connected_components(&dims[0], &dims[1]));
    let mut absorbed = levels[0];
    if let Some(c) = components {
        absorbed += levels[1] - c;
    }
    absorbed += levels.iter().skip(2).map(|l| l - 1).sum::<usize>();
    Absorption {
        levels,
        components,
        absorbed,
        singletons,
    }
}

/// `n - k_used - absorbed`; must be at least one.
pub fn df_residual(n: usize, k_used: usize, absorbed: usize) -> Result<usize> {
    let df = n as i64 - k_used as i64 - absorbed as i64;
    if df <= 0 {
        return Err(Error::DegreesOfFreedom(df));
    }
    Ok(df as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimension() {
        let labels: Vec<usize> = (0..100).map(|i| i % 10).collect();
        let g = FeGroups::from_labels(&[labels]).unwrap();
        let a = absorption(&g);
        assert_eq!(a.absorbed, 10);
        assert_eq!(df_residual(100, 3, a.absorbed).unwrap(), 87);
    }

    #[test]
    fn two_dimensions_connected_and_disconnected() {
        // 5 x 4 levels, 60 rows, every cell filled -> connected
        let a: Vec<usize> = (0..60).map(|i| i % 5).collect();
        let b: Vec<usize> = (0..60).map(|i| (i / 5) % 4).collect();
        let g = FeGroups::from_labels(&[a, b]).unwrap();
        let abs = absorption(&g);
        assert_eq!(abs.components, Some(1));
        assert_eq!(df_residual(60, 2, abs.absorbed).unwrap(), 50);

        // levels {0,1,2} of a only meet {0,1} of b; {3,4} only meet {2,3}
        let a: Vec<usize> = (0..60).map(|i| i % 5).collect();
        let b: Vec<usize> = (0..60)
            .map(|i| if i % 5 < 3 { (i / 5) % 2 } else { 2 + (i / 5) % 2 })
            .collect();
        let g = FeGroups::from_labels(&[a, b]).unwrap();
        let abs = absorption(&g);
        assert_eq!(abs.levels, vec![5, 4]);
        assert_eq!(abs.components, Some(2));
        assert_eq!(df_residual(60, 2, abs.absorbed).unwrap(), 51);
    }

    #[test]
    fn non_positive_df_is_an_error() {
        assert!(matches!(df_residual(5, 2, 3), Err(Error::DegreesOfFreedom(0))));
    }
}
