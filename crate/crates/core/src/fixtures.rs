//! Hand-built reference models.
//!
//! Each function returns a fresh model reproducing one of the worked
//! examples: the ball and person membership diagrams, the transition
//! semantics of dots and gates, the meeting organization process and the
//! education evaluation case. The same models ship as `.topo.xml` files under
//! `fixtures/`; `examples/write_fixtures.rs` regenerates them.

use crate::model::{ArcId, CircleId, DotKind, Model, NodeId, RelationId};
use crate::pilots::{bind_service, Instruction};

/// Thin builder over [`Model`] that panics on invalid construction. Fixtures
/// are fixed data, so a failure here is a bug in this file.
struct Build(Model);

impl Build {
    fn node(&mut self, name: &str) -> NodeId {
        self.0.add_node(name, None).expect("node")
    }

    fn dot(&mut self, name: &str, kind: DotKind) -> NodeId {
        self.0.add_node(name, Some(kind)).expect("dot")
    }

    fn circle(&mut self, owner: NodeId, name: &str) -> CircleId {
        self.0.add_circle(owner, name).expect("circle")
    }

    /// A new object node placed in `circle`.
    fn member(&mut self, name: &str, circle: CircleId) -> NodeId {
        let n = self.node(name);
        self.0.place_star(n.into(), circle).expect("star");
        n
    }

    fn place(&mut self, node: NodeId, circle: CircleId) {
        self.0.place_star(node.into(), circle).expect("star");
    }

    fn arc(&mut self, from: NodeId, to: NodeId) -> ArcId {
        self.0.connect_arc(from, to).expect("arc")
    }

    fn arc_with(&mut self, from: NodeId, to: NodeId, dot: &str, kind: DotKind) -> ArcId {
        let a = self.arc(from, to);
        let d = self.dot(dot, kind);
        self.0.push_dot(a, d).expect("dot on arc");
        a
    }

    fn framed(&mut self, frame: NodeId, nodes: &[NodeId]) {
        for n in nodes {
            self.0.set_frame(*n, Some(frame)).expect("frame");
        }
    }

    fn attr(&mut self, node: NodeId, name: &str, value: &str) {
        self.0.set_attribute(node, name, value).expect("attribute");
    }

    fn assoc(&mut self, a: CircleId, b: CircleId) -> RelationId {
        self.0.add_association(a, b).expect("association")
    }

    fn bind(&mut self, circle: CircleId, arc: ArcId) -> RelationId {
        self.0.add_flow_binding(circle, arc).expect("flow binding")
    }

    fn pilot(&mut self, pilot: NodeId, target: NodeId, root: bool, service: Vec<Instruction>) {
        self.0.add_pilot(pilot.into(), target, root).expect("pilot");
        bind_service(&mut self.0, pilot.into(), target, service).expect("service");
    }

    fn done(self) -> Model {
        debug_assert!(self.0.check_integrity().is_ok());
        self.0
    }
}

fn build() -> Build {
    Build(Model::new())
}

/// Node `Balls` with five colour circles; two blue balls and one green.
pub fn balls() -> Model {
    let mut b = build();
    let balls = b.node("Balls");
    let mut circles = Vec::new();
    for colour in ["blue", "green", "red", "yellow", "white"] {
        circles.push(b.circle(balls, colour));
    }
    b.member("blue-ball-1", circles[0]);
    b.member("blue-ball-2", circles[0]);
    b.member("green-ball-1", circles[1]);
    b.done()
}

/// John placed in four sets at once.
pub fn john() -> Model {
    let mut b = build();
    let john = b.node("John");
    for set in ["Person", "Student", "Employee", "Playing football"] {
        let owner = b.node(set);
        let c = b.circle(owner, set);
        b.place(john, c);
    }
    b.done()
}

/// Association `X`–`Y` instantiated by x1–y1, x1–y3, x2–y2 and x2–y4.
pub fn association_instances() -> Model {
    let mut b = build();
    let x = b.node("X");
    let y = b.node("Y");
    let cx = b.circle(x, "X");
    let cy = b.circle(y, "Y");
    let xy = b.assoc(cx, cy);
    let xs: Vec<NodeId> = ["x1", "x2"].iter().map(|n| b.member(n, cx)).collect();
    let ys: Vec<NodeId> = ["y1", "y2", "y3", "y4"]
        .iter()
        .map(|n| b.member(n, cy))
        .collect();
    for (xi, yi) in [(0, 0), (0, 2), (1, 1), (1, 3)] {
        let sx = b.0.star_in(xs[xi].into(), cx).unwrap();
        let sy = b.0.star_in(ys[yi].into(), cy).unwrap();
        b.0.instantiate_association(xy, sx, sy).expect("link");
    }
    b.done()
}

/// Sub-sets as multiple membership: `A` and `B` are sub-sets of `C`, and
/// `obj-1` belongs to both `C` and `A`.
pub fn multiple_membership() -> Model {
    let mut b = build();
    let c = b.node("C");
    let a = b.node("A");
    let bb = b.node("B");
    let d = b.node("D");
    let cc = b.circle(c, "C");
    let ca = b.circle(a, "A");
    let cb = b.circle(bb, "B");
    let cd = b.circle(d, "D");
    b.assoc(cc, cd);
    b.assoc(ca, cd);
    let o1 = b.member("obj-1", cc);
    b.place(o1, ca);
    let o2 = b.member("obj-2", cc);
    b.place(o2, cb);
    b.member("obj-3", cc);
    b.done()
}

/// The five meeting stages as a bare chain.
pub fn meeting_chain() -> Model {
    let mut b = build();
    let stages: Vec<NodeId> = MEETING_STAGES.iter().map(|s| b.node(s)).collect();
    for w in stages.windows(2) {
        b.arc(w[0], w[1]);
    }
    b.done()
}

pub const MEETING_STAGES: [&str; 5] = [
    "Initialisation",
    "Select participants",
    "Propose date",
    "Select date",
    "Reserve room",
];

/// One transition fixture: `Anna` waits in the source node's place circle,
/// which is bound to the single arc `from → to`.
fn transition(from: &str, to: &str, dot: Option<(&str, DotKind)>) -> Model {
    let mut b = build();
    let src = b.node(from);
    let dst = b.node(to);
    let place = b.circle(src, "place");
    b.member("Anna", place);
    let arc = match dot {
        Some((name, kind)) => b.arc_with(src, dst, name, kind),
        None => b.arc(src, dst),
    };
    b.bind(place, arc);
    b.done()
}

/// Plain arc: the token leaves `Pre-registration` and enters `Registration`.
pub fn plain_transition() -> Model {
    transition("Pre-registration", "Registration", None)
}

/// Rounded dot: `Studying` keeps the star, `Student association` gains one.
pub fn duplicate_transition() -> Model {
    transition(
        "Studying",
        "Student association",
        Some(("member-dot", DotKind::Duplicate)),
    )
}

/// Gate: the star in `Studying` ends with the study.
pub fn gate_transition() -> Model {
    transition(
        "Studying",
        "End of study",
        Some(("end-gate", DotKind::Gate)),
    )
}

/// Persons enter `Studying` from the `Person` circle through a rounded dot,
/// so a student remains a person, and leave through a gate.
pub fn studying() -> Model {
    let mut b = build();
    let person = b.node("Person");
    b.attr(person, "name", "text");
    let persons = b.circle(person, "Person");
    for p in ["Alice", "Bob", "Carol"] {
        b.member(p, persons);
    }
    let enrol = b.node("Enrolment");
    let study = b.node("Studying");
    let done = b.node("Graduated");
    let entry = b.arc_with(enrol, study, "student-dot", DotKind::Duplicate);
    b.arc_with(study, done, "study-gate", DotKind::Gate);
    b.bind(persons, entry);
    b.done()
}

/// Meeting organization, merged with its data.
///
/// The `Meeting` circle of `Initialisation` holds the VIP meeting and feeds
/// the first arc through a rounded dot, so the meeting keeps its class star
/// as the anchor for everything the later stages attach. `Organizer` is the
/// root pilot of the frame and runs its own services at three stages:
///
/// * Select participants: link persons matching `p*` and duplicate them
///   into `Participant`.
/// * Propose date: link every date, then wait two ticks.
/// * Reserve room: link `room-a`.
///
/// `Select date` has no pilot of its own and inherits the root service.
pub fn meeting() -> Model {
    let mut b = build();
    let frame = b.node("Meeting organization");
    let organizer = b.node("Organizer");
    let stages: Vec<NodeId> = MEETING_STAGES.iter().map(|s| b.node(s)).collect();
    b.framed(frame, &stages);

    let meetings = b.circle(stages[0], "Meeting");
    b.member("VIP", meetings);

    let person = b.node("Person");
    b.attr(person, "name", "text");
    b.attr(person, "email", "text");
    let persons = b.circle(person, "Person");
    let participants = b.circle(person, "Participant");
    for p in ["p1", "p2", "p3", "visitor"] {
        b.member(p, persons);
    }
    let date = b.node("Date");
    b.attr(date, "day", "date");
    let dates = b.circle(date, "Date");
    for d in ["d-monday", "d-tuesday"] {
        b.member(d, dates);
    }
    let room = b.node("Room");
    b.attr(room, "seats", "integer");
    let rooms = b.circle(room, "Room");
    for r in ["room-a", "room-b"] {
        b.member(r, rooms);
    }

    let meeting_person = b.assoc(meetings, persons);
    let meeting_date = b.assoc(meetings, dates);
    let meeting_room = b.assoc(meetings, rooms);
    b.assoc(participants, dates);

    let first = b.arc_with(stages[0], stages[1], "meeting-dot", DotKind::Duplicate);
    for w in stages[1..].windows(2) {
        b.arc(w[0], w[1]);
    }
    b.bind(meetings, first);

    b.pilot(organizer, frame, true, vec![Instruction::Forward]);
    b.pilot(
        organizer,
        stages[1],
        false,
        vec![
            Instruction::Link {
                association: meeting_person,
                selector: "p*".into(),
            },
            Instruction::DuplicateTo {
                circle: participants,
            },
            Instruction::Forward,
        ],
    );
    b.pilot(
        organizer,
        stages[2],
        false,
        vec![
            Instruction::Link {
                association: meeting_date,
                selector: "*".into(),
            },
            Instruction::Wait { ticks: 2 },
            Instruction::Forward,
        ],
    );
    b.pilot(
        organizer,
        stages[4],
        false,
        vec![
            Instruction::Link {
                association: meeting_room,
                selector: "room-a".into(),
            },
            Instruction::Forward,
        ],
    );
    b.done()
}

pub const EVALUATION_CHAIN: [&str; 7] = [
    "Start evaluation",
    "Definition of evaluation form",
    "Printing and addressing",
    "Distribution of forms",
    "Form processing (FAC)",
    "Form processing (HQ)",
    "Sending results",
];

/// Education evaluation: the faculty owns the process, headquarters and
/// teachers take delegated activities, and headquarters' directives come in
/// from an external process.
///
/// * The `Evaluation` circle feeds the first arc; its rounded dot keeps the
///   evaluation in its class so the forms and results it gathers stay
///   attached to it.
/// * `Directives` belong to `Publish directives`, the end of the external
///   process, and enter `Definition of evaluation form` through a rounded
///   dot: they stay in the list of directives.
/// * Square dots label the flows of forms and results; the circles they own
///   describe their contents.
/// * `Distribution of forms` is delegated to `Teacher`, whose service routes
///   to the faculty's form processing. Printing and the headquarters' form
///   processing are delegated to `HQ`.
pub fn education_evaluation() -> Model {
    let mut b = build();
    let main_frame = b.node("Education evaluation");
    let ext_frame = b.node("Definition of directives");
    let fac = b.node("FAC");
    let hq = b.node("HQ");
    let teacher = b.node("Teacher");

    let chain: Vec<NodeId> = EVALUATION_CHAIN.iter().map(|s| b.node(s)).collect();
    let hq_input = b.node("HQ input");
    let [start, design, printing, distribution, fp_fac, fp_hq, sending] =
        <[NodeId; 7]>::try_from(chain.clone()).unwrap();
    b.framed(main_frame, &chain);
    b.framed(main_frame, &[hq_input]);

    let define = b.node("Define directives");
    let publish = b.node("Publish directives");
    b.framed(ext_frame, &[define, publish]);

    let evaluation = b.node("Evaluation");
    b.attr(evaluation, "course", "text");
    b.attr(evaluation, "semester", "text");
    let evaluations = b.circle(evaluation, "Evaluation");
    b.member("eval-1", evaluations);

    let directive = b.node("Directive");
    b.attr(directive, "issued-by", "HQ");
    let drafts = b.circle(directive, "Drafts");
    let directives = b.circle(publish, "Directives");
    b.assoc(directives, drafts);
    b.member("directive-2026", directives);

    let design_place = b.circle(design, "place");
    b.assoc(design_place, directives);

    let lesson = b.node("Lesson");
    let lessons = b.circle(lesson, "Lesson");
    let person = b.node("Person");
    b.attr(person, "name", "text");
    let persons = b.circle(person, "Person");
    b.assoc(lessons, persons);
    let distribution_place = b.circle(distribution, "place");
    b.assoc(distribution_place, lessons);

    let entry = b.arc_with(start, design, "evaluation-dot", DotKind::Duplicate);
    let input = b.arc_with(hq_input, design, "directives-dot", DotKind::Duplicate);
    let forms_arc = b.arc_with(design, printing, "Forms", DotKind::Label);
    b.arc(printing, distribution);
    let to_fac = b.arc(distribution, fp_fac);
    b.arc(distribution, fp_hq);
    let results_fac = b.arc_with(fp_fac, sending, "Evaluation results", DotKind::Label);
    b.arc_with(fp_hq, sending, "Evaluation results (HQ)", DotKind::Label);
    let publish_arc = b.arc_with(define, publish, "drafts-dot", DotKind::Duplicate);

    let forms_dot = b.0.arc(forms_arc).unwrap().dots[0];
    let forms = b.circle(forms_dot, "Forms");
    b.member("form-2026", forms);
    let results_dot = b.0.arc(results_fac).unwrap().dots[0];
    let results = b.circle(results_dot, "Evaluation results");
    b.member("results-2026", results);
    let eval_forms = b.assoc(evaluations, forms);
    let eval_results = b.assoc(evaluations, results);

    b.bind(evaluations, entry);
    b.bind(directives, input);
    b.bind(drafts, publish_arc);

    b.pilot(fac, main_frame, true, vec![Instruction::Forward]);
    b.pilot(hq, ext_frame, true, vec![Instruction::Forward]);
    b.pilot(
        hq,
        printing,
        false,
        vec![
            Instruction::Link {
                association: eval_forms,
                selector: "*".into(),
            },
            Instruction::Forward,
        ],
    );
    b.pilot(
        teacher,
        distribution,
        false,
        vec![Instruction::Route { arc: to_fac }],
    );
    let processing = vec![
        Instruction::Link {
            association: eval_results,
            selector: "*".into(),
        },
        Instruction::Forward,
    ];
    b.pilot(fac, fp_fac, false, processing.clone());
    b.pilot(hq, fp_hq, false, processing);
    b.done()
}

/// Every fixture with its file stem.
pub fn all() -> Vec<(&'static str, Model)> {
    vec![
        ("balls", balls()),
        ("john", john()),
        ("association_instances", association_instances()),
        ("multiple_membership", multiple_membership()),
        ("meeting_chain", meeting_chain()),
        ("plain_transition", plain_transition()),
        ("duplicate_transition", duplicate_transition()),
        ("gate_transition", gate_transition()),
        ("studying", studying()),
        ("meeting", meeting()),
        ("education_evaluation", education_evaluation()),
    ]
}
