#pragma once

// Locally adaptive nearest neighbors: a weighted kNN classifier in which every
// training point carries its own learned diagonal metric.

#include "lann/core.hpp"
#include "lann/data_io.hpp"
#include "lann/evaluation.hpp"
#include "lann/inference.hpp"
#include "lann/model_io.hpp"
#include "lann/neighbors.hpp"
#include "lann/random.hpp"
#include "lann/training.hpp"
