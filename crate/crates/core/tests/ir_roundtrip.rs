mod common;

use proptest::prelude::*;
use qstack::ir::{parse, print, Circuit};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_of_print_is_identity(circuit in common::any_circuit()) {
        let text = print(&circuit);
        let back = parse(&text).expect("printed text parses");
        prop_assert_eq!(&back, &circuit);
        prop_assert_eq!(print(&back), text);
    }

    #[test]
    fn arbitrary_text_never_panics(src in "(version 1.0\nqubits [0-9]\n)?[a-z_{}|#\\[\\]0-9,. \n*/-]{0,120}") {
        let _ = parse(&src);
    }

    #[test]
    fn mutated_programs_either_parse_or_report_a_position(
        circuit in common::any_circuit(),
        cut in 0usize..400,
        junk in "[a-z\\[\\]{}|,0-9 ]{0,6}",
    ) {
        let mut text = print(&circuit);
        let at = text.char_indices().map(|(i, _)| i).nth(cut % text.len().max(1)).unwrap_or(0);
        text.insert_str(at, &junk);
        match parse(&text) {
            Ok(c) => {
                let _: &Circuit = &c;
                prop_assert!(c.gates().all(|g| g.qubits().iter().all(|&q| q < c.num_qubits())));
            }
            Err(e) => prop_assert!(e.line >= 1 && e.column >= 1),
        }
    }
}

#[test]
fn example_programs_round_trip() {
    let bell = "version 1.0\nqubits 2\nh q[0]\ncnot q[0], q[1]\n{ measure_z q[0] | measure_z q[1] }\n";
    let c = parse(bell).unwrap();
    assert_eq!(print(&c), bell);
}
