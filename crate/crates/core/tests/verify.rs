use qdsim::verify::{run_suite, Suite};

fn assert_suite(s: Suite) {
    let rep = run_suite(s).unwrap();
    for c in &rep.checks {
        println!("{c}");
        assert!(c.passed, "{c}");
    }
    println!("{} checks in {:.2}s", rep.checks.len(), rep.wall_time);
}

#[test]
fn group_suite() {
    assert_suite(Suite::Group);
}

#[test]
fn operators_suite() {
    assert_suite(Suite::Operators);
}

#[test]
fn ribbons_suite() {
    assert_suite(Suite::Ribbons);
}

#[test]
fn braiding_suite() {
    assert_suite(Suite::Braiding);
}

#[test]
fn fusion_suite() {
    assert_suite(Suite::Fusion);
}
