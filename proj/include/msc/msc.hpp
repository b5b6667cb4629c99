#pragma once

// Multi-source clustering forest: unsupervised tree-ensemble clustering
// over a main feature source plus auxiliary heterogeneous sources, with
// forest-affinity spectral clustering, tag inference, and key-clip
// summarisation.

#include "msc/affinity.hpp"
#include "msc/augment.hpp"
#include "msc/correlation.hpp"
#include "msc/csv.hpp"
#include "msc/dataset.hpp"
#include "msc/errors.hpp"
#include "msc/evaluation.hpp"
#include "msc/forest.hpp"
#include "msc/impurity.hpp"
#include "msc/inference.hpp"
#include "msc/random.hpp"
#include "msc/serialize.hpp"
#include "msc/spectral.hpp"
#include "msc/summary.hpp"
#include "msc/synth.hpp"
