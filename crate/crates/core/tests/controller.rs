mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use remote_site::controller::{
    admissible, decide, drc_rs, enumerate_controls, exhaustive, rrm, rrm_setting, transition, ControlGrid,
    ControllerKind, SiteModel, SlotInputs,
};
use remote_site::site::SiteState;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lookahead_matches_exhaustive_search(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng);
        let grid = random_grid(&mut rng, &model.compute);
        let state = random_state(&mut rng, &model.compute);
        let window: Vec<_> = (0..rng.gen_range(1..=2)).map(|_| random_inputs(&mut rng)).collect();
        prop_assert_eq!(drc_rs(&state, &window, &grid, &model).unwrap(), exhaustive(&state, &window, &grid, &model).unwrap());
    }

    #[test]
    fn one_step_lookahead_is_the_pointwise_argmin(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng);
        let grid = random_grid(&mut rng, &model.compute);
        let state = random_state(&mut rng, &model.compute);
        let inputs = random_inputs(&mut rng);
        let d = drc_rs(&state, &[inputs], &grid, &model).unwrap();
        let cands = enumerate_controls(&state, &grid, &inputs, &model).unwrap();
        let best = cands
            .iter()
            .min_by(|a, b| a.outcome.cost.total_cmp(&b.outcome.cost).then(a.tie_key().partial_cmp(&b.tie_key()).unwrap()))
            .unwrap();
        prop_assert_eq!(d.setting, best.setting);
        prop_assert_eq!(d.expected_cost, best.outcome.cost);
    }

    #[test]
    fn chosen_settings_are_admissible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng);
        let grid = random_grid(&mut rng, &model.compute);
        let state = random_state(&mut rng, &model.compute);
        let window: Vec<_> = (0..2).map(|_| random_inputs(&mut rng)).collect();
        for kind in [ControllerKind::DrcRs, ControllerKind::Rrm] {
            let d = decide(kind, &state, &window, &grid, &model, 0.7).unwrap();
            let out = transition(&state, &d.setting, &window[0], &model).unwrap();
            if !d.emergency {
                prop_assert!(admissible(&state, &d.setting, &out, false, &model) || kind == ControllerKind::Rrm);
                prop_assert!(out.realized.energy.site + model.reserve_j <= state.energy);
            }
            prop_assert_eq!(out.realized.control.processed(), out.realized.control.gamma.iter().sum::<u64>());
            prop_assert!(out.realized.control.gamma.iter().all(|&g| g <= model.compute.max_container_load_bits));
        }
    }

    #[test]
    fn enumerated_candidates_partition_their_work(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng);
        let grid = random_grid(&mut rng, &model.compute);
        let state = random_state(&mut rng, &model.compute);
        let inputs = random_inputs(&mut rng);
        for c in enumerate_controls(&state, &grid, &inputs, &model).unwrap() {
            let ctl = &c.outcome.realized.control;
            prop_assert_eq!(ctl.gamma.len(), c.setting.containers);
            let cap = model.compute.container_capacity_bits(c.setting.rate);
            prop_assert!(ctl.gamma.iter().all(|&g| g <= cap));
            prop_assert!(ctl.processed() <= state.q_in + ctl.gamma_star);
        }
    }
}

#[test]
fn idle_site_with_full_battery_sleeps_on_minimum_containers() {
    let model = SiteModel::with_defaults(20e3);
    let grid = ControlGrid::full(&model.compute);
    let state = SiteState::initial(model.battery.capacity_j, model.compute.min_containers);
    let window = vec![SlotInputs { load_a: 0, load_b: 0, solar: 300e3, wind: 100e3 }; 3];
    let d = drc_rs(&state, &window, &grid, &model).unwrap();
    assert!(!d.setting.sigma);
    assert_eq!(d.setting.containers, model.compute.min_containers);
    assert_eq!(d.setting.drivers, 0);
    assert_eq!(d.setting, grid.emergency(&model.compute));
}

#[test]
fn full_reservation_is_the_maximum_control() {
    let model = SiteModel::with_defaults(20e3);
    let grid = ControlGrid::full(&model.compute);
    let s = rrm_setting(&grid, &model.compute, 1.0).unwrap();
    assert!(s.sigma && s.delta_nic);
    assert_eq!((s.containers, s.drivers, s.rate, s.zeta), (20, 6, 105.0, 1.0));
    assert_eq!(rrm_setting(&grid, &model.compute, 0.5).unwrap().containers, 10);
}

#[test]
fn reservation_falls_back_when_storage_runs_low() {
    let model = SiteModel::with_defaults(20e3);
    let grid = ControlGrid::full(&model.compute);
    let inputs = [SlotInputs { load_a: 10_000_000, load_b: 10_000_000, solar: 0.0, wind: 0.0 }];
    let full = SiteState::initial(model.battery.capacity_j, 1);
    assert!(!rrm(&full, &inputs, &grid, &model, 0.7).unwrap().emergency);
    let low = SiteState::initial(model.reserve_j + 1.0, 1);
    let d = rrm(&low, &inputs, &grid, &model, 0.7).unwrap();
    assert!(d.emergency);
    assert_eq!(d.setting, grid.emergency(&model.compute));
}

#[test]
fn energy_weight_alone_prefers_slower_processing() {
    // With only the energy term, the same admission at a higher rate costs more.
    let mut model = SiteModel::with_defaults(20e3);
    model.weights.upsilon = 1.0;
    let state = SiteState::initial(400e3, 1);
    let inputs = SlotInputs { load_a: 1_000_000, load_b: 1_000_000, solar: 0.0, wind: 0.0 };
    let base = remote_site::controller::Setting { sigma: true, zeta: 1.0, containers: 2, rate: 50.0, drivers: 1, delta_nic: false };
    let slow = transition(&state, &base, &inputs, &model).unwrap();
    let fast = transition(&state, &remote_site::controller::Setting { rate: 105.0, ..base }, &inputs, &model).unwrap();
    assert!(fast.realized.energy.site > slow.realized.energy.site);
    assert!(fast.cost > slow.cost);
    assert_eq!(slow.cost, slow.realized.energy.site / model.reference_energy_j);
}

#[test]
fn decisions_are_repeatable() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let model = random_model(&mut rng);
    let grid = ControlGrid::full(&model.compute);
    let state = random_state(&mut rng, &model.compute);
    let window: Vec<_> = (0..3).map(|_| random_inputs(&mut rng)).collect();
    let a = drc_rs(&state, &window, &grid, &model).unwrap();
    let b = drc_rs(&state, &window, &grid, &model).unwrap();
    assert_eq!(a, b);
}
