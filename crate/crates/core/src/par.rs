// Copyright 2026 The confine-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Execution backends for the data-parallel kernels.
//!
//! Every kernel here either writes disjoint elements (so the result does not
//! depend on scheduling) or reduces over fixed-size blocks whose partial
//! results are combined sequentially in block order. Output is therefore
//! bit-identical between [`Exec::Sequential`] and [`Exec::Parallel`] and for
//! any worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Block length for reductions. Changing it changes round-off, so it is fixed.
pub const REDUCE_BLOCK: usize = 1 << 12;

/// Minimum elements handed to one parallel task in elementwise kernels.
#[cfg_attr(not(feature = "parallel"), allow(dead_code))]
const MIN_TASK: usize = 1 << 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Rayon on the current pool; identical to `Sequential` without the
    /// `parallel` feature.
    #[default]
    Parallel,
}

impl Exec {
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    #[inline]
    fn parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Apply `f(global_index, &mut item)` to every element.
pub fn for_each_indexed<T, F>(exec: Exec, data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.parallel() && data.len() > MIN_TASK {
        data.par_chunks_mut(MIN_TASK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let base = c * MIN_TASK;
                for (k, x) in chunk.iter_mut().enumerate() {
                    f(base + k, x);
                }
            });
        return;
    }
    let _ = exec;
    for (k, x) in data.iter_mut().enumerate() {
        f(k, x);
    }
}

/// Visit every index pair `(b, b | stride)` with the `stride` bit clear.
///
/// `stride` must be a power of two smaller than `data.len()`, and the length
/// a multiple of `2 * stride`.
pub fn for_each_pair<T, F>(exec: Exec, data: &mut [T], stride: usize, f: F)
where
    T: Send,
    F: Fn(&mut T, &mut T) + Sync + Send,
{
    debug_assert!(stride.is_power_of_two() && data.len() % (2 * stride) == 0);
    let block = 2 * stride;

    #[cfg(feature = "parallel")]
    if exec.parallel() && data.len() > MIN_TASK {
        if block <= MIN_TASK {
            data.par_chunks_mut(MIN_TASK).for_each(|chunk| {
                for pair in chunk.chunks_mut(block) {
                    let (lo, hi) = pair.split_at_mut(stride);
                    lo.iter_mut().zip(hi.iter_mut()).for_each(|(a, b)| f(a, b));
                }
            });
        } else {
            for pair in data.chunks_mut(block) {
                let (lo, hi) = pair.split_at_mut(stride);
                lo.par_chunks_mut(MIN_TASK)
                    .zip(hi.par_chunks_mut(MIN_TASK))
                    .for_each(|(l, h)| l.iter_mut().zip(h.iter_mut()).for_each(|(a, b)| f(a, b)));
            }
        }
        return;
    }
    let _ = exec;
    for pair in data.chunks_mut(block) {
        let (lo, hi) = pair.split_at_mut(stride);
        lo.iter_mut().zip(hi.iter_mut()).for_each(|(a, b)| f(a, b));
    }
}

/// Block-ordered reduction over `0..n`.
///
/// `map` folds one block `[start, end)` into an accumulator, `combine` merges
/// block accumulators strictly left to right.
pub fn reduce_blocks<A, M, C>(exec: Exec, n: usize, identity: impl Fn() -> A + Sync + Send, map: M, combine: C) -> A
where
    A: Send,
    M: Fn(A, usize, usize) -> A + Sync + Send,
    C: Fn(A, A) -> A,
{
    let blocks = n.div_ceil(REDUCE_BLOCK);
    let run = |b: usize| {
        let start = b * REDUCE_BLOCK;
        map(identity(), start, (start + REDUCE_BLOCK).min(n))
    };

    #[cfg(feature = "parallel")]
    if exec.parallel() && blocks > 1 {
        let partials: Vec<A> = (0..blocks).into_par_iter().map(run).collect();
        return partials.into_iter().fold(identity(), combine);
    }
    let _ = exec;
    (0..blocks).map(run).fold(identity(), combine)
}

/// Order-preserving parallel map over a slice of independent jobs.
pub fn map_collect<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Run `f` inside a dedicated pool of `threads` workers (when parallel
/// execution is compiled in), otherwise call it directly.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_is_backend_independent() {
        let xs: Vec<f64> = (0..50_000).map(|i| ((i as f64) * 0.37).sin() * 1e-3 + 1.0 / (1.0 + i as f64)).collect();
        let sum = |exec| {
            reduce_blocks(exec, xs.len(), || 0.0, |acc, a, b| acc + xs[a..b].iter().sum::<f64>(), |a, b| a + b)
        };
        let seq = sum(Exec::Sequential);
        let par = sum(Exec::Parallel);
        assert_eq!(seq.to_bits(), par.to_bits());
        let par3 = with_threads(Some(3), || sum(Exec::Parallel));
        assert_eq!(seq.to_bits(), par3.to_bits());
    }

    #[test]
    fn pairs_cover_every_index_once() {
        for stride in [1usize, 2, 8, 4096, 8192] {
            let mut v = vec![0u32; 1 << 14];
            for_each_pair(Exec::Parallel, &mut v, stride, |a, b| {
                *a += 1;
                *b += 10;
            });
            for (i, x) in v.iter().enumerate() {
                let expect = if i & stride == 0 { 1 } else { 10 };
                assert_eq!(*x, expect, "stride {stride} index {i}");
            }
        }
    }

    #[test]
    fn indexed_visit_matches_position() {
        let mut v = vec![0usize; 10_000];
        for_each_indexed(Exec::Parallel, &mut v, |i, x| *x = i);
        assert!(v.iter().enumerate().all(|(i, x)| i == *x));
    }
}
