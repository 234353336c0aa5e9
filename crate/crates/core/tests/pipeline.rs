use shiftnet::circuit::{parse_circuit, write_circuit};
use shiftnet::flow::{max_concurrent_flow, verify_flow};
use shiftnet::funcgen::{build_barrel_shifter, build_depth3_shift, mult_oracle, shift_oracle, ShiftEncoding, ShiftSpec};
use shiftnet::netcode::{parse_instance, undirect, write_instance};
use shiftnet::reduction::{certify_a, certify_b, ModeAOptions, ModeBOptions, Value};
use shiftnet::{ExactModeBReport, ModeAReportF64, Rational};

#[test]
fn multiplying_by_a_power_of_two_is_a_shift() {
    let n = 6;
    for xv in 0..1u32 << n {
        let x: Vec<bool> = (0..n).map(|i| xv >> i & 1 == 1).collect();
        for j in 0..n {
            let pow: Vec<bool> = (0..n).map(|i| i == j).collect();
            let product = mult_oracle(&x, &pow);
            assert_eq!(product, shift_oracle(ShiftSpec::plain(n), &x, j + 1).unwrap(), "x={xv} j={j}");
        }
    }
}

#[test]
fn certificate_survives_text_round_trip() {
    let c = build_barrel_shifter(4).unwrap();
    let reparsed = parse_circuit(&write_circuit(&c)).unwrap();
    let direct: ModeAReportF64 = certify_a(&c, &ModeAOptions::default()).unwrap();
    let again: ModeAReportF64 = certify_a(&reparsed, &ModeAOptions::default()).unwrap();
    assert!(direct.certificate.verdict());
    assert_eq!(direct.certificate.render_table(), again.certificate.render_table());

    // the written instance reproduces the certificate's LP
    let inst = parse_instance(&write_instance(&direct.instance)).unwrap();
    let flow = max_concurrent_flow::<Rational>(&undirect(&inst, false).unwrap()).unwrap();
    assert!((direct.flow.rate - shiftnet::scalar::ratio_to_f64(&flow.rate)).abs() < 1e-6);
}

#[test]
fn exact_mode_b_on_a_shift_circuit() {
    let c = build_depth3_shift(ShiftSpec::plain(8), 0.5, ShiftEncoding::OneHot).unwrap().circuit;
    let rep: ExactModeBReport = certify_b(&c, &ModeBOptions { k: 2, ..Default::default() }).unwrap();
    assert!(rep.correctness.passed());
    assert!(verify_flow(&rep.flow_instance, &rep.flow).is_empty());
    let cert = &rep.certificate;
    let step = cert.step("conjecture consistency").unwrap();
    assert!(step.pass);
    assert!(matches!(step.lhs, Value::Exact(_)));
    // every hint is charged: the supervisor capacity is the exact expected cost
    let costs: Rational = rep.network.costs.iter().sum();
    assert_eq!(cert.step("supervisor budget").unwrap().lhs, Value::Exact(costs));
}
