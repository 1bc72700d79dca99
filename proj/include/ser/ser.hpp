#pragma once

// Umbrella header for the speech emotion recognition toolkit.

#include "ser/audio.hpp"
#include "ser/dataset.hpp"
#include "ser/emotion.hpp"
#include "ser/ensemble.hpp"
#include "ser/error.hpp"
#include "ser/fft.hpp"
#include "ser/functionals.hpp"
#include "ser/harness/corpus.hpp"
#include "ser/harness/features_csv.hpp"
#include "ser/harness/metrics.hpp"
#include "ser/harness/pipeline.hpp"
#include "ser/harness/split.hpp"
#include "ser/harness/synth.hpp"
#include "ser/lld.hpp"
#include "ser/models/common.hpp"
#include "ser/models/knn.hpp"
#include "ser/models/nn.hpp"
#include "ser/models/serialize.hpp"
#include "ser/models/standardizer.hpp"
#include "ser/models/svm.hpp"
#include "ser/models/tree.hpp"
#include "ser/selection.hpp"
