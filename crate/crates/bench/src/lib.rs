//! Shared inputs for the benchmarks, sized like the acceptance workloads.

use bioprep_core::audiodsp::{window_manifest, Spectrogram, DEFAULT_HOP_S, DEFAULT_MIN_COUNT, DEFAULT_WIN_S};
use bioprep_core::eval::LabelSet;
use bioprep_core::rng::DetRng;
use bioprep_core::{synth, ClipRecord, TaxonomyTable, WindowRecord};
use ndarray::Array2;

/// 264 names at least 3 edits apart, and `n` single-edit corruptions of them.
pub fn snap_workload(n: usize) -> (LabelSet, Vec<String>) {
    let names = synth::name_set(264, 3, 264);
    let mut rng = DetRng::new(5);
    let queries = (0..n)
        .map(|_| {
            let i = rng.below(names.len());
            synth::corrupt(&names[i], &mut rng)
        })
        .collect();
    (LabelSet::new(names).expect("distinct names"), queries)
}

const WORDS: [&str; 24] = [
    "a", "the", "bird", "sings", "loudly", "in", "forest", "rain", "falls", "on", "roof", "wind", "blows", "over",
    "lake", "frog", "croaks", "at", "night", "distant", "traffic", "hums", "while", "leaves",
];

fn sentence(rng: &mut DetRng) -> String {
    let n = 6 + rng.below(8);
    (0..n).map(|_| *rng.choose(&WORDS).unwrap()).collect::<Vec<_>>().join(" ")
}

/// `n` candidate captions with three references each.
pub fn captions(n: usize) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rng = DetRng::new(20);
    let cands = (0..n).map(|_| sentence(&mut rng)).collect();
    let refs = (0..n).map(|_| (0..3).map(|_| sentence(&mut rng)).collect()).collect();
    (cands, refs)
}

/// Random non-negative energies, `frames` by `bands`.
pub fn energies(frames: usize, bands: usize) -> Spectrogram {
    let mut rng = DetRng::new(3);
    let data = Array2::from_shape_fn((frames, bands), |_| rng.unit() * 10.0);
    Spectrogram::new(data, 100.0).expect("finite energies")
}

/// One hour of soundscape metadata (60 clips of 60 s) and its windows.
pub fn soundscape_hour() -> (TaxonomyTable, Vec<ClipRecord>, Vec<WindowRecord>) {
    let table = synth::taxonomy(300, 9);
    let clips: Vec<ClipRecord> = (0..60)
        .map(|i| synth::soundscape(&format!("s{i:03}"), 60.0, &table, 20, 40, 9))
        .collect();
    let (_, windows) =
        window_manifest(&clips, DEFAULT_WIN_S, DEFAULT_HOP_S, DEFAULT_MIN_COUNT, 0.0).expect("valid windowing");
    (table, clips, windows)
}
