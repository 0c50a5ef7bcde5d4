//! Upper bound for the number of bright colors, by the per-stage ledger of
//! the recursive construction.

use crate::error::ColorError;

/// K(m, 1) = m + 3: a fixed-point-free single-valued map from a closed
/// subset of R^m is brightly colorable with m + 3 colors.
///
/// For n >= 2, writing K1 = bound(m, n-1), the construction pays:
///
/// - `K1` for the collision stratum (|f(x)| < n recursed at n-1);
/// - `n * K1^2` for the first stage over the singleton-projection sets,
///   one argmax split (squared recursion) per index;
/// - `C(n, j) * n * K1^2` for each later stage j = 2..n-1 over j-sized
///   index sets, each a stratified pass of at most n splits;
/// - `K1^2` for the final leftover stratum, a single split.
pub fn bound(m: u32, n: u32) -> Result<u128, ColorError> {
    if m == 0 || n == 0 {
        return Err(ColorError::InvalidBoundArgs(m, n));
    }
    let overflow = || ColorError::BoundOverflow(m, n);
    let mut k: u128 = m as u128 + 3;
    for level in 2..=n {
        let k1 = k;
        let k1sq = k1.checked_mul(k1).ok_or_else(overflow)?;
        let mut total = k1
            .checked_add(
                (level as u128)
                    .checked_mul(k1sq)
                    .ok_or_else(overflow)?,
            )
            .ok_or_else(overflow)?;
        for j in 2..level {
            let stage = binomial(level, j)
                .ok_or_else(overflow)?
                .checked_mul(level as u128)
                .and_then(|v| v.checked_mul(k1sq))
                .ok_or_else(overflow)?;
            total = total.checked_add(stage).ok_or_else(overflow)?;
        }
        total = total.checked_add(k1sq).ok_or_else(overflow)?;
        k = total;
    }
    Ok(k)
}

fn binomial(n: u32, j: u32) -> Option<u128> {
    let j = j.min(n - j);
    let mut acc: u128 = 1;
    for i in 0..j {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_case_is_m_plus_3() {
        for m in 1..=10 {
            assert_eq!(bound(m, 1).unwrap(), m as u128 + 3);
        }
        assert_eq!(bound(5, 1).unwrap(), 8);
        assert_eq!(bound(1, 1).unwrap(), 4);
    }

    #[test]
    fn ledger_value_n2() {
        // K1 = 4: 4 + 2*16 + 0 + 16 = 52.
        assert_eq!(bound(1, 2).unwrap(), 52);
        // K1 = 5: 5 + 2*25 + 25 = 80.
        assert_eq!(bound(2, 2).unwrap(), 80);
    }

    #[test]
    fn strictly_monotone() {
        for m in 1..=6u32 {
            for n in 1..=4u32 {
                let here = bound(m, n).unwrap();
                assert!(bound(m + 1, n).unwrap() > here);
                assert!(bound(m, n + 1).unwrap() > here);
            }
        }
    }

    #[test]
    fn invalid_and_overflow() {
        assert!(matches!(bound(0, 1), Err(ColorError::InvalidBoundArgs(0, 1))));
        assert!(matches!(bound(1, 0), Err(ColorError::InvalidBoundArgs(1, 0))));
        assert!(matches!(bound(5, 9), Err(ColorError::BoundOverflow(5, 9))));
    }
}
