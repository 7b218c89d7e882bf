#pragma once

// Umbrella header: the whole feature-selection benchmark library.

#include "featbench/classifier.hpp"
#include "featbench/csv.hpp"
#include "featbench/dataset.hpp"
#include "featbench/errors.hpp"
#include "featbench/feature_select.hpp"
#include "featbench/forest.hpp"
#include "featbench/gabor.hpp"
#include "featbench/glcm.hpp"
#include "featbench/kernel.hpp"
#include "featbench/metrics.hpp"
#include "featbench/naive_bayes.hpp"
#include "featbench/neural_net.hpp"
#include "featbench/pgm.hpp"
#include "featbench/pipeline.hpp"
#include "featbench/radiomics.hpp"
#include "featbench/report.hpp"
#include "featbench/rng.hpp"
#include "featbench/sds.hpp"
#include "featbench/svm.hpp"
#include "featbench/tree.hpp"
