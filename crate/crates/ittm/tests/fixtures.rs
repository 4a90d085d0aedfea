//! Keeps the checked-in machine documents under `machines/` in sync with
//! their in-code generators. Run with `REGEN_FIXTURES=1` to rewrite the
//! files; without it the test fails on any drift.

use std::fs;
use std::path::Path;

use ittm::compose::{unary_doubling, unary_successor};
use ittm::format::{serialize_document, MachineDocument};
use ittm::ittm::{IttmAction, IttmTarget, TapeId};
use ittm::{Dir, ITTMachine, LimitRule};

/// One ordinary state: write a 1 on the output tape and halt. From a
/// blank start this halts at stage 1 with output "1(0)^w".
fn one_writer() -> ITTMachine {
    ITTMachine::from_fn(1, |_, t| IttmAction {
        write: [t[0], 1, t[2]],
        dir: Dir::R,
        next: IttmTarget::Halt,
    })
}

fn fixtures() -> Vec<(&'static str, MachineDocument)> {
    let doc = |m: ITTMachine| MachineDocument::Ittm { machine: m, rule: LimitRule::Limsup };
    vec![
        ("onewriter.ittm", doc(one_writer())),
        ("successor.ittm", doc(unary_successor().to_ittm(TapeId::Input))),
        ("doubling.ittm", doc(unary_doubling().to_ittm(TapeId::Input))),
    ]
}

#[test]
fn machine_documents_match_their_generators() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../machines");
    let regen = std::env::var_os("REGEN_FIXTURES").is_some();
    if regen {
        fs::create_dir_all(&dir).unwrap();
    }
    for (name, doc) in fixtures() {
        let path = dir.join(name);
        let expected = serialize_document(&doc);
        if regen {
            fs::write(&path, &expected).unwrap();
            continue;
        }
        let on_disk = fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{}: {e}; regenerate with REGEN_FIXTURES=1", path.display()));
        assert_eq!(on_disk, expected, "{name} drifted from its generator");
    }
}
