use pyo3::prelude::*;
use pyo3::types::PyDict;

fn run(code: &std::ffi::CStr) {
    Python::attach(|py| {
        let m = PyModule::new(py, "bwqa_py").unwrap();
        bwqa_py::register(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("bwqa", m).unwrap();
        if let Err(e) = py.run(code, Some(&globals), None) {
            e.print(py);
            panic!("python code failed");
        }
    });
}

#[test]
fn session_round_trip() {
    run(c"
s = bwqa.Session()
assert s.greeting
r = s.ask('What color is the Toyota block?')
assert r['response'] == 'The Toyota block is green.', r['response']
assert r['ulf'].startswith('(')
m = s.move('Toyota', -0.15, -0.1)
assert m['label'] == 'Toyota' and m['revision'] == 1
assert any(b['label'] == 'Toyota' for b in s.scene()['blocks'])
t = s.transcript()
assert bwqa.replay(t) == t
");
}

#[test]
fn errors_carry_codes() {
    run(c"
def code(f, *a):
    try:
        f(*a)
    except bwqa.BwqaError as e:
        assert isinstance(e, ValueError)
        return e.args[0]
    raise AssertionError('no error')

s = bwqa.Session()
assert code(s.ask, '') == 'EMPTY_INPUT'
assert code(s.move, 'Toyota', 5.0, 0.0) == 'OUT_OF_BOUNDS'
assert code(s.move, 'Nope', 0.0, 0.0) == 'UNKNOWN_LABEL'
assert code(bwqa.parse, 'which blocks are by the Toyota block?') == 'UNSUPPORTED_PREPOSITION'
assert code(bwqa.replay, 'not json') == 'BAD_TRANSCRIPT'
assert code(bwqa.Session, '{\"blocks\": 3}') is not None
");
}

#[test]
fn evaluate_and_parse() {
    run(c"
r = bwqa.evaluate()
assert r['spatial'] >= 120 and not r['line_errors']
assert bwqa.parse('which blocks are on two other blocks ?') == \
    '(((Which.d (plur block.n)) ((pres be.v) (on.p (two.d (other.a (plur block.n)))))) ?)'
import json
assert json.loads(bwqa.bundled_scene())['blocks']
");
}
