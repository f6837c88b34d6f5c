use approx::assert_abs_diff_eq;
use proptest::prelude::*;

use discord_merge::correlations::{discord, mutual_information};
use discord_merge::density::DensityMatrix;
use discord_merge::io::{density_from_json, density_to_json};
use discord_merge::linalg::{max_abs, trace};
use discord_merge::measurement::{measure_b, Measurement};
use discord_merge::merging::{merge_cost, merge_markup};
use discord_merge::optimize::OptimizerConfig;
use discord_merge::states::{ginibre, random_unitary, random_vector, rng_for};

fn state(dims: &[usize], seed: u64) -> DensityMatrix {
    let d = dims.iter().product();
    let rank = 1 + (seed as usize % d);
    DensityMatrix::new(ginibre(d, rank, &mut rng_for(seed)), dims.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partial_trace_of_product(sa in any::<u64>(), sb in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let a = state(&[da], sa);
        let b = state(&[db], sb);
        let ab = a.tensor(&b);
        assert_abs_diff_eq!(max_abs(&(ab.partial_trace(&[0]).unwrap().data() - a.data())), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(max_abs(&(ab.partial_trace(&[1]).unwrap().data() - b.data())), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&ab).unwrap().get(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn local_unitaries_preserve_entropies(seed in any::<u64>()) {
        let rho = state(&[2, 3], seed);
        let mut rng = rng_for(seed ^ 1);
        let rotated = rho
            .apply_unitary(&random_unitary(2, &mut rng), &[0]).unwrap()
            .apply_unitary(&random_unitary(3, &mut rng), &[1]).unwrap();
        assert_abs_diff_eq!(rho.entropy().get(), rotated.entropy().get(), epsilon = 1e-9);
        assert_abs_diff_eq!(mutual_information(&rho).unwrap().get(), mutual_information(&rotated).unwrap().get(), epsilon = 1e-9);
    }

    #[test]
    fn mutual_information_is_bounded(seed in any::<u64>()) {
        let rho = state(&[2, 3], seed);
        let i = mutual_information(&rho).unwrap().get();
        prop_assert!((-1e-9..=2.0 + 1e-9).contains(&i));
        prop_assert!(merge_cost(&rho).unwrap().get() >= -1.0 - 1e-9);
    }

    #[test]
    fn measurement_ensembles_are_normalized(seed in any::<u64>(), theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU) {
        let rho = state(&[3, 2], seed);
        let e = measure_b(&rho, &Measurement::projective_qubit(theta, phi)).unwrap();
        assert_abs_diff_eq!(e.probs.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(max_abs(&(e.averaged_state() - rho.partial_trace(&[0]).unwrap().data())), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn neumark_statistics_match(seed in any::<u64>(), outcomes in 3usize..6) {
        let mut rng = rng_for(seed);
        let vectors: Vec<_> = (0..outcomes).map(|_| random_vector(2, &mut rng)).collect();
        let m = Measurement::rank_one_povm(&vectors).unwrap();
        let rho_b = state(&[2], seed ^ 7);
        let direct = m.probabilities(rho_b.data());
        let dilated = m.neumark_extend().unwrap().statistics(rho_b.data());
        for (x, y) in direct.iter().zip(&dilated) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn markup_is_at_least_discord(seed in any::<u64>(), theta in 0.0..std::f64::consts::PI, phi in 0.0..std::f64::consts::TAU) {
        let rho = state(&[2, 2], seed);
        let markup = merge_markup(&rho, &Measurement::projective_qubit(theta, phi)).unwrap().markup.get();
        let d = discord(&rho, &OptimizerConfig::default()).unwrap().discord.get();
        prop_assert!(markup >= d - 1e-7, "markup {markup} below discord {d}");
    }

    #[test]
    fn json_roundtrip(seed in any::<u64>()) {
        let rho = state(&[2, 2], seed);
        let back = density_from_json(&density_to_json(&rho)).unwrap();
        prop_assert_eq!(back.dims(), rho.dims());
        prop_assert_eq!(max_abs(&(back.data() - rho.data())), 0.0);
        assert_abs_diff_eq!(trace(back.data()).re, 1.0, epsilon = 1e-12);
    }
}
