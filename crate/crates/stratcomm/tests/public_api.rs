use stratcomm::engine::{EngineRegistry, Game, RateEstimate};
use stratcomm::model::Distribution;
use stratcomm::rate::{classify_region, Emptiness};
use stratcomm::rational::{int, rat};
use stratcomm::strategy::neighbour_strategy;
use stratcomm::utility::{gamma_sign, GammaSign, UtilityMatrix};

fn growing_image_game() -> Game {
    Game::pessimistic(UtilityMatrix::binary(int(1), int(-2)), Distribution::binary(rat(3, 10)).unwrap(), rat(1, 5)).unwrap()
}

#[test]
fn frozen_neighbour_class_probabilities() {
    let game = growing_image_game();
    let registry = EngineRegistry::default();
    let golden = [(4, 1, rat(1029, 2500)), (5, 1, rat(20923, 25000)), (5, 2, rat(16023, 20000))];
    for name in ["sequence", "type", "auto"] {
        let engine = registry.get(name).unwrap();
        for (n, i, expected) in &golden {
            let out = engine.evaluate(&game, &neighbour_strategy(&rat(3, 10), *n, *i).unwrap()).unwrap();
            assert_eq!(&out.recovered_prob, expected, "{name} n={n} g{i}");
            assert!(out.coop_recovered_prob >= out.recovered_prob);
        }
    }
}

#[test]
fn recovered_rate_never_exceeds_image_rate() {
    let game = growing_image_game();
    let registry = EngineRegistry::default();
    let engine = registry.get("sequence").unwrap();
    for n in 1..=8 {
        for i in 1..=4 {
            let out = engine.evaluate(&game, &neighbour_strategy(&rat(3, 10), n, i).unwrap()).unwrap();
            if let (RateEstimate::Exact(r), RateEstimate::Exact(image)) = (out.rate(), out.image_rate()) {
                assert!(r <= image + 1e-12, "n={n} g{i}: {r} > {image}");
            }
        }
    }
}

#[test]
fn negative_cycles_give_a_nonempty_lossless_region() {
    let u = UtilityMatrix::new(vec![
        vec![int(0), int(1), int(1)],
        vec![int(-4), int(0), int(1)],
        vec![int(-4), int(-4), int(0)],
    ])
    .unwrap();
    assert_eq!(gamma_sign(&u), GammaSign::Negative);
    let p = Distribution::new(vec![rat(1, 2), rat(1, 3), rat(1, 6)]).unwrap();
    let report = classify_region(&u, &p, &int(0)).unwrap();
    assert_eq!(report.emptiness, Emptiness::Nonempty);
}
