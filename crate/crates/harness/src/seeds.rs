//! Per-trial seed derivation.
//!
//! A trial seed is obtained by folding each label component into the master
//! seed with SplitMix64: `s ← splitmix64(s ^ c)` for every component `c`.
//! String labels are first reduced to a `u64` with FNV-1a. Seeds therefore
//! depend only on `(master, labels)`, never on execution order. Derived
//! seeds keep 63 bits so that they fit a TOML integer.

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub fn derive_seed(master: u64, tag: &str, components: &[u64]) -> u64 {
    let mut s = splitmix64(master ^ fnv1a(tag));
    for &c in components {
        s = splitmix64(s ^ c);
    }
    s >> 1
}
