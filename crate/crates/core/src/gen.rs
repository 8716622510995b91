//! Seeded generators for randomized self-checks: pointed posets and monotone
//! endomaps drawn deterministically from a ChaCha stream, so every run sees
//! the same instances.

use std::sync::Arc;

use rand::Rng;

use crate::bitrel::BitRel;
use crate::poset::{Elem, FinitePointedPoset, MonotoneMap};

/// A random pointed poset with between 1 and `max_elements` elements.
/// Element 0 is the bottom; other edges only point from lower to higher
/// indices, so antisymmetry holds by construction.
pub fn random_pointed_poset(rng: &mut impl Rng, max_elements: usize) -> FinitePointedPoset {
    let n = rng.gen_range(1..=max_elements.max(1));
    let mut rel = BitRel::new(n);
    for i in 0..n {
        rel.set(i, i);
        if i > 0 {
            rel.set(0, i);
        }
        for j in i + 1..n {
            if i > 0 && rng.gen_ratio(1, 3) {
                rel.set(i, j);
            }
        }
    }
    rel.reflexive_transitive_close();
    let labels: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    FinitePointedPoset::from_bitrel(labels, rel).expect("construction yields a pointed poset")
}

/// A random monotone endomap: images are assigned in index order (a linear
/// extension), each drawn uniformly from the elements compatible with the
/// images already fixed. Falls back to the constant-bottom map if a draw
/// paints itself into a corner too often.
pub fn random_monotone_endomap(rng: &mut impl Rng, poset: &Arc<FinitePointedPoset>) -> MonotoneMap {
    'attempt: for _ in 0..100 {
        let mut table: Vec<Elem> = Vec::with_capacity(poset.len());
        for x in poset.elements() {
            let candidates: Vec<Elem> = poset
                .elements()
                .filter(|&z| {
                    table
                        .iter()
                        .enumerate()
                        .all(|(y, &fy)| !poset.leq(Elem(y), x) || poset.leq(fy, z))
                })
                .collect();
            if candidates.is_empty() {
                continue 'attempt;
            }
            table.push(candidates[rng.gen_range(0..candidates.len())]);
        }
        return MonotoneMap::new(poset.clone(), poset.clone(), table)
            .expect("constraints enforce monotonicity");
    }
    MonotoneMap::constant(poset.clone(), poset.clone(), poset.bottom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_posets_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let p = random_pointed_poset(&mut rng, 8);
            assert!(!p.is_empty());
            // Round-trip through explicit validation.
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            for i in 0..p.len() {
                for j in 0..p.len() {
                    if p.leq(Elem(i), Elem(j)) {
                        pairs.push((i, j));
                    }
                }
            }
            let q = FinitePointedPoset::validate(p.labels().to_vec(), pairs).unwrap();
            assert_eq!(p, q);
        }
    }

    #[test]
    fn generated_maps_are_monotone_endomaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let p = Arc::new(random_pointed_poset(&mut rng, 6));
            let f = random_monotone_endomap(&mut rng, &p);
            assert!(f.is_endo());
        }
    }
}
