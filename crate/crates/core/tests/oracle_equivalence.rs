mod common;

use common::*;
use remind_core::dsl;
use remind_core::simulator::{brute_force_oracle, incremental_fire_offsets};

#[test]
fn incremental_matches_oracle_on_random_programs() {
    let home = fuzz_home();
    let mut rng = Rng8::seed_from_u64(7);
    let mut nonempty = 0;
    for case in 0..300 {
        let start = random_start(&mut rng);
        let ticks = rand::Rng::gen_range(&mut rng, 50..=2000);
        let interval = *rand::seq::SliceRandom::choose(&[1u64, 1, 2, 5][..], &mut rng).unwrap();
        let gen = ProgramGen { start, span: (ticks * interval) as i64, max_delay: 90 };
        let program = gen.event(&mut rng, 4);
        assert!(depth(&program) <= 4, "{program}");
        let checked = dsl::typecheck(&dsl::TriggerProgram::from_root(program.clone(), String::new()), &home);
        assert!(checked.is_ok(), "{program}");
        let trace = random_trace(&mut rng, start, ticks, interval);
        let a = incremental_fire_offsets(&program, &trace, interval);
        let b = brute_force_oracle(&program, &trace, interval);
        assert_eq!(a, b, "case {case}: {program}");
        nonempty += usize::from(!a.is_empty());
    }
    assert!(nonempty > 100, "{nonempty}");
}
