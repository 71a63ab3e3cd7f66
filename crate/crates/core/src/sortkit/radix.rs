use super::{double_to_key, SortItem};
use crate::Result;

const DIGITS: usize = 8;
const BUCKETS: usize = 256;

/// Stable ascending LSD radix sort of `(key, value)` pairs on the `u64` key.
///
/// One scan fills all eight digit histograms, then each digit relocates the
/// pairs into a scratch buffer. Digits on which every key agrees are skipped
/// since the relocation would be the identity.
pub fn radix_sort_keys<T: Copy>(pairs: &mut Vec<(u64, T)>) {
    let n = pairs.len();
    if n <= 1 {
        return;
    }
    let mut counts = [[0usize; BUCKETS]; DIGITS];
    for &(k, _) in pairs.iter() {
        for (d, hist) in counts.iter_mut().enumerate() {
            hist[((k >> (8 * d)) & 0xff) as usize] += 1;
        }
    }

    let mut scratch = pairs.clone();
    for (d, hist) in counts.iter().enumerate() {
        if hist.contains(&n) {
            continue;
        }
        let mut offsets = [0usize; BUCKETS];
        let mut sum = 0;
        for (slot, &c) in offsets.iter_mut().zip(hist.iter()) {
            *slot = sum;
            sum += c;
        }
        for &pair in pairs.iter() {
            let b = ((pair.0 >> (8 * d)) & 0xff) as usize;
            scratch[offsets[b]] = pair;
            offsets[b] += 1;
        }
        std::mem::swap(pairs, &mut scratch);
    }
}

/// Stable ascending sort of items by key.
pub fn radix_sort(items: &[SortItem]) -> Result<Vec<SortItem>> {
    let mut pairs = items
        .iter()
        .map(|it| Ok((double_to_key(it.key)?, it.payload)))
        .collect::<Result<Vec<_>>>()?;
    radix_sort_keys(&mut pairs);
    Ok(pairs
        .into_iter()
        .map(|(k, payload)| SortItem::new(super::key_to_double(k), payload))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SplitMix64;
    use crate::Error;
    use proptest::prelude::*;

    #[test]
    fn ties_keep_input_order() {
        let items = [
            SortItem::new(2.5, 0),
            SortItem::new(0.5, 1),
            SortItem::new(2.5, 2),
        ];
        let sorted = radix_sort(&items).unwrap();
        let payloads: Vec<_> = sorted.iter().map(|s| s.payload).collect();
        assert_eq!(payloads, vec![1, 0, 2]);
        assert!(radix_sort(&[]).unwrap().is_empty());
    }

    #[test]
    fn rejects_invalid_keys() {
        let items = [SortItem::new(1.0, 0), SortItem::new(f64::NAN, 1)];
        assert!(matches!(radix_sort(&items), Err(Error::InvalidKey(_))));
    }

    #[test]
    fn matches_stable_comparison_sort() {
        let mut rng = SplitMix64::new(31);
        let items: Vec<SortItem> = (0..100_000)
            .map(|i| {
                let key = if rng.below(5) == 0 {
                    (rng.below(50) as f64) * 0.25
                } else {
                    rng.unit() * 1e3
                };
                SortItem::new(key, i)
            })
            .collect();
        let mut expected = items.clone();
        expected.sort_by(|a, b| a.key.partial_cmp(&b.key).unwrap());
        assert_eq!(radix_sort(&items).unwrap(), expected);
    }

    proptest! {
        #[test]
        fn sorts_arbitrary_keys_stably(keys in prop::collection::vec(any::<u64>(), 0..300)) {
            let mut pairs: Vec<(u64, usize)> =
                keys.iter().map(|k| k % 1000 * 0x0101_0101).enumerate().map(|(i, k)| (k, i)).collect();
            let mut expected = pairs.clone();
            expected.sort_by_key(|p| p.0);
            radix_sort_keys(&mut pairs);
            prop_assert_eq!(pairs, expected);
        }
    }
}
