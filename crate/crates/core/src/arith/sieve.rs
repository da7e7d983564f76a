//! Prime enumeration by Eratosthenes sieve.

/// Smallest-prime-factor table for `0..=limit`: entry `i` holds the
/// least prime dividing `i`, with `0` at indices 0 and 1. Factoring an
/// entry is then a walk dividing by `spf[i]` until 1.
pub fn spf_table(limit: u64) -> Vec<u32> {
    assert!(limit <= u32::MAX as u64, "table entries are u32");
    let limit = limit as usize;
    let mut spf = vec![0u32; limit + 1];
    for i in 2..=limit {
        if spf[i] == 0 {
            let mut j = i;
            while j <= limit {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// All primes `p <= limit` in increasing order.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return vec![];
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for p in 2..=limit {
        if composite[p] {
            continue;
        }
        primes.push(p as u64);
        let mut j = p * p;
        while j <= limit {
            composite[j] = true;
            j += p;
        }
    }
    primes
}
