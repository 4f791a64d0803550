//! Hand-written example use cases that seed the few-shot prompts and the
//! dataset generator.

/// A command with its classified and extracted forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedCommand {
    pub command: &'static str,
    pub action_type: &'static str,
    pub t1: &'static str,
    pub t2: &'static str,
}

pub const SEED_COMMANDS: &[SeedCommand] = &[
    SeedCommand {
        command: "select the highest building on main street",
        action_type: "select",
        t1: "action type: select\naction arg1: height\naction arg2: main street",
        t2: "entity: building\natomic action type: select_by_tag\natomic action arg1: tag: str:main street\n\n\
             entity: building\natomic action type: scale_getter\natomic action arg1: y: inf",
    },
    SeedCommand {
        command: "find the cars on oak avenue",
        action_type: "select",
        t1: "action type: select\naction arg2: oak avenue",
        t2: "entity: vehicle\natomic action type: select_by_tag\natomic action arg1: tag: str:oak avenue",
    },
    SeedCommand {
        command: "pick the widest building between 10 and 50 meters from the center",
        action_type: "select",
        t1: "action type: select\naction arg1: width\naction arg3: 10 to 50 meters from center",
        t2: "entity: building\natomic action type: range\natomic action arg1: start: num:10\natomic action arg2: end: num:50\n\n\
             entity: building\natomic action type: scale_getter\natomic action arg1: x: inf",
    },
    SeedCommand {
        command: "highlight the road closest to point 30 0 -30",
        action_type: "select",
        t1: "action type: select\naction arg4: closest to 30 0 -30",
        t2: "entity: road\natomic action type: locate\natomic action arg1: x: num:30\natomic action arg2: y: num:0\natomic action arg3: z: num:-30",
    },
    SeedCommand {
        command: "make the tallest building on harbor street 2 times taller",
        action_type: "mesh",
        t1: "action type: mesh\naction arg1: height\naction arg2: harbor street\naction arg6: 2 times taller",
        t2: "entity: building\natomic action type: select_by_tag\natomic action arg1: tag: str:harbor street\n\n\
             entity: building\natomic action type: scale_getter\natomic action arg1: y: inf\n\n\
             entity: building\natomic action type: scale_setter\natomic action arg1: x: num:1\natomic action arg2: y: num:2\natomic action arg3: z: num:1",
    },
    SeedCommand {
        command: "move the cars on main street 10 meters east",
        action_type: "mesh",
        t1: "action type: mesh\naction arg2: main street\naction arg7: 10 meters east",
        t2: "entity: vehicle\natomic action type: select_by_tag\natomic action arg1: tag: str:main street\n\n\
             entity: vehicle\natomic action type: translate\natomic action arg1: offset: vec:10,0,0",
    },
    SeedCommand {
        command: "stretch the roads on oak avenue 3 times longer",
        action_type: "mesh",
        t1: "action type: mesh\naction arg2: oak avenue\naction arg6: 3 times longer",
        t2: "entity: road\natomic action type: select_by_tag\natomic action arg1: tag: str:oak avenue\n\n\
             entity: road\natomic action type: scale_setter\natomic action arg1: x: num:1\natomic action arg2: y: num:1\natomic action arg3: z: num:3",
    },
    SeedCommand {
        command: "clear the selection then resize the lowest building 2 times bigger",
        action_type: "mesh",
        t1: "action type: mesh\naction arg1: minimal height\naction arg5: clear the selection\naction arg6: 2 times bigger",
        t2: "entity: building\natomic action type: deselect_all\n\n\
             entity: building\natomic action type: scale_getter\natomic action arg1: y: -inf\n\n\
             entity: building\natomic action type: scale_setter\natomic action arg1: x: num:2\natomic action arg2: y: num:2\natomic action arg3: z: num:2",
    },
];

/// A single slot grounded into one record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotExample {
    pub slot: &'static str,
    pub span: &'static str,
    pub action: &'static str,
    pub t2: &'static str,
}

pub const SLOT_EXAMPLES: &[SlotExample] = &[
    SlotExample {
        slot: "superlative degree",
        span: "width",
        action: "scale_getter",
        t2: "entity: building\natomic action type: scale_getter\natomic action arg1: x: inf",
    },
    SlotExample {
        slot: "superlative degree",
        span: "minimal height",
        action: "scale_getter",
        t2: "entity: road\natomic action type: scale_getter\natomic action arg1: y: -inf",
    },
    SlotExample {
        slot: "location",
        span: "oak avenue",
        action: "select_by_tag",
        t2: "entity: vehicle\natomic action type: select_by_tag\natomic action arg1: tag: str:oak avenue",
    },
    SlotExample {
        slot: "distance",
        span: "10 to 50 meters from center",
        action: "range",
        t2: "entity: building\natomic action type: range\natomic action arg1: start: num:10\natomic action arg2: end: num:50",
    },
    SlotExample {
        slot: "proximity",
        span: "closest to 30 0 -30",
        action: "locate",
        t2: "entity: road\natomic action type: locate\natomic action arg1: x: num:30\natomic action arg2: y: num:0\natomic action arg3: z: num:-30",
    },
    SlotExample {
        slot: "reset",
        span: "clear the selection",
        action: "deselect_all",
        t2: "entity: building\natomic action type: deselect_all",
    },
    SlotExample {
        slot: "resize",
        span: "2 times taller",
        action: "scale_setter",
        t2: "entity: building\natomic action type: scale_setter\natomic action arg1: x: num:1\natomic action arg2: y: num:2\natomic action arg3: z: num:1",
    },
    SlotExample {
        slot: "movement",
        span: "10 meters east",
        action: "translate",
        t2: "entity: vehicle\natomic action type: translate\natomic action arg1: offset: vec:10,0,0",
    },
];

/// Seed commands of one action type.
pub fn seeds_of(action_type: &str) -> Vec<&'static SeedCommand> {
    SEED_COMMANDS.iter().filter(|s| s.action_type == action_type).collect()
}

/// `k` slot examples for `action`: its own first, then the rest in order.
pub fn slot_examples_for(action: &str, k: usize) -> Vec<&'static SlotExample> {
    let own = SLOT_EXAMPLES.iter().filter(|e| e.action == action);
    let other = SLOT_EXAMPLES.iter().filter(|e| e.action != action);
    own.chain(other).take(k).collect()
}

/// `k` seed plans as `(T₂ text, plan text)`.
pub fn plan_examples(k: usize) -> Vec<(&'static str, String)> {
    SEED_COMMANDS
        .iter()
        .take(k)
        .map(|s| {
            let n = s.t2.split("\n\n").count();
            let plan = (1..=n).map(|i| format!("do {i}")).collect::<Vec<_>>().join("\n");
            (s.t2, plan)
        })
        .collect()
}
