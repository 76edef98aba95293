mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn twisted_algebra_laws(seed in any::<u64>()) {
        let case = common::law_case(seed);
        prop_assert_eq!(common::check_laws(&case), Ok(()));
    }
}
