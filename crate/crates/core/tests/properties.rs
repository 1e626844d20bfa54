use proptest::prelude::*;

use workbench::depth_zero::{double_coset_count, endoscopic_datum, stabilizer, DepthZeroCharacter};
use workbench::orbital::{dominant_regular_box, GPrimePrefactor, OrbitalSetup};
use workbench::rootdata::{RootDatum, PRESETS};
use workbench::scalars::CycloField;
use workbench::spectral::{DualTorusPoly, TransferSetup};

fn character(rd: &RootDatum, m: u64, seed: &[u8]) -> DepthZeroCharacter {
    let c: Vec<i64> = (0..rd.rank())
        .map(|i| seed[i % seed.len()] as i64 % m as i64)
        .collect();
    DepthZeroCharacter::new(m, &c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matching_holds_for_random_characters(
        preset in 0..PRESETS.len(),
        m in prop::sample::select(vec![2u64, 3, 4, 6, 12]),
        chi in prop::collection::vec(any::<u8>(), 3),
        psi in prop::collection::vec(any::<u8>(), 3),
        pick in any::<prop::sample::Index>(),
    ) {
        let rd = RootDatum::preset(PRESETS[preset]).unwrap();
        let e = endoscopic_datum(&rd, &character(&rd, m, &chi)).unwrap();
        let s = OrbitalSetup::new(&rd, &e, &character(&rd, m, &psi));
        let boxed = dominant_regular_box(&rd, 2);
        let nu = pick.get(&boxed);
        let r = s.matching_check(nu, GPrimePrefactor::PerW).unwrap();
        prop_assert!(r.pass, "{:?}", r.witness);
    }

    #[test]
    fn block_count_is_double_coset_count(
        preset in 0..PRESETS.len(),
        m in prop::sample::select(vec![2u64, 3, 4, 6]),
        chi in prop::collection::vec(any::<u8>(), 3),
        psi in prop::collection::vec(any::<u8>(), 3),
        nu in prop::collection::vec(-2i64..=2, 3),
    ) {
        let rd = RootDatum::preset(PRESETS[preset]).unwrap();
        let e = endoscopic_datum(&rd, &character(&rd, m, &chi)).unwrap();
        let p = character(&rd, m, &psi);
        let s = TransferSetup::new(&rd, &e, &p);
        let w = rd.weyl_group().unwrap();
        let stab = stabilizer(&w, &s.theta());
        let field = CycloField::new(m);
        let f = s.g_element(&DualTorusPoly::orbit_sum(&field, &nu[..rd.rank()], &stab)).unwrap();
        let pkg = s.bold_zeta(&f).unwrap();
        prop_assert_eq!(pkg.block_count(), double_coset_count(&e.w_prime, &w, &stab));
        // xi_transfer keeps the block count
        prop_assert_eq!(s.xi_transfer(&f).unwrap().block_count(), pkg.block_count());
    }
}
