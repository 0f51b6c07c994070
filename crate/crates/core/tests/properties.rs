#[path = "support/properties.rs"]
mod properties;

macro_rules! suite {
    ($name:ident) => {
        #[test]
        fn $name() {
            if let Err(e) = properties::$name() {
                panic!("{e}");
            }
        }
    };
}

suite!(compositing_weight_bounds);
suite!(object_order_invariance);
suite!(density_view_invariance);
suite!(scatter_fraction_range);
suite!(transform_round_trips);
suite!(rng_determinism);
suite!(stratified_bin_membership);
suite!(metric_symmetry);

#[test]
fn every_suite_is_listed() {
    assert_eq!(properties::SUITES.len(), 8);
}
