#pragma once

namespace labelstack {

/// How loops over independent work items (trees, instances, repetitions)
/// are run. Parallel uses OpenMP; Serial is the reference path the parallel
/// one must match bit for bit.
enum class Execution { Serial, Parallel };

}  // namespace labelstack
