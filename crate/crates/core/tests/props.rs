//! Property tests for the wire format, water filling, and quantizer
//! geometry.

use commgp::persym::wire::{read_header, write_header, BitReader, BitWriter};
use commgp::persym::cached_quantizer;
use commgp::water_fill;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any mix of field widths must round-trip through the bit packer.
    #[test]
    fn packed_fields_round_trip(
        fields in prop::collection::vec((1u32..=16, any::<u32>()), 1..200)
    ) {
        let mut writer = BitWriter::new();
        for &(width, raw) in &fields {
            writer.put(raw & ((1u32 << width) - 1), width);
        }
        let bytes = writer.finish();
        let mut reader = BitReader::new(&bytes);
        for &(width, raw) in &fields {
            prop_assert_eq!(reader.get(width).unwrap(), raw & ((1u32 << width) - 1));
        }
    }

    /// Headers round-trip exactly and place the body on a byte edge.
    #[test]
    fn headers_round_trip(
        bits in prop::collection::vec(0u8..=16, 1..40),
        n in 0u64..1_000_000
    ) {
        let per_dim: Vec<u32> = bits.iter().map(|&b| b as u32).collect();
        let mut out = Vec::new();
        write_header(&mut out, &per_dim, n);
        let header = read_header(&out).unwrap();
        prop_assert_eq!(header.per_dim_bits, per_dim);
        prop_assert_eq!(header.n, n);
        prop_assert_eq!(header.body_offset, out.len());
    }

    /// Jointly scaling the spectrum and the budget leaves the rate unchanged.
    #[test]
    fn water_fill_rate_is_scale_free(
        eigs in prop::collection::vec(1e-3..1e3f64, 1..6),
        frac in 0.01..0.99f64,
        scale in 1e-3..1e3f64
    ) {
        let total: f64 = eigs.iter().sum();
        let base = water_fill(&eigs, frac * total).unwrap().rate_bits;
        let scaled: Vec<f64> = eigs.iter().map(|&l| scale * l).collect();
        let rate = water_fill(&scaled, scale * frac * total).unwrap().rate_bits;
        prop_assert!((rate - base).abs() <= 1e-9 * base.max(1.0));
    }

    /// Each centroid lies inside its own cell, so re-quantizing a
    /// reconstruction is a fixed point.
    #[test]
    fn centroids_are_fixed_points(rate in 0u32..=8) {
        let q = cached_quantizer(rate).unwrap();
        for k in 0..q.cells() {
            prop_assert_eq!(q.index_of(q.centroid(k)), k);
        }
    }

    /// Quantization commutes with the odd symmetry of the codebook.
    #[test]
    fn quantization_is_odd_symmetric(rate in 1u32..=8, u in -6.0..6.0f64) {
        let q = cached_quantizer(rate).unwrap();
        let k = q.index_of(u);
        let mirrored = q.index_of(-u);
        // Boundary hits map to the right-open cell, whose mirror differs by
        // one; interior points mirror exactly.
        let exact_mirror = q.cells() - 1 - k;
        prop_assert!(mirrored == exact_mirror || mirrored + 1 == exact_mirror);
        prop_assert_eq!(q.centroid(k), -q.centroid(q.cells() - 1 - k));
    }
}
