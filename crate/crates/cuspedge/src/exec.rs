//! Data-parallel map helpers. With the `parallel` feature (default) the
//! batch entry points fan out over rayon; without it they fall back to the
//! sequential implementation. `par_map_seq` is always available so the two
//! paths can be benchmarked against each other.

/// Sequential reference implementation.
pub fn par_map_seq<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Map `f` over `items`, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn par_map<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    par_map_seq(items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        let f = |x: &f64| (x.sin() * x.exp()).to_bits();
        assert_eq!(par_map(&xs, f), par_map_seq(&xs, f));
    }
}
