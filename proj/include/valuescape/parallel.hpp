#pragma once

namespace valuescape {

// Kernels with a data-parallel inner loop come in two flavors: a serial
// reference implementation (the semantics all acceptance tests pin down)
// and an OpenMP variant. Where both exist they are compared in the test
// suite and in the benchmark target.
enum class ExecMode { serial, openmp };

}  // namespace valuescape
