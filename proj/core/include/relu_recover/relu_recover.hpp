#pragma once

#include "relu_recover/config.hpp"
#include "relu_recover/convergence.hpp"
#include "relu_recover/dataset_io.hpp"
#include "relu_recover/errors.hpp"
#include "relu_recover/experiments.hpp"
#include "relu_recover/numerics.hpp"
#include "relu_recover/objective.hpp"
#include "relu_recover/permutation.hpp"
#include "relu_recover/plot.hpp"
#include "relu_recover/result_table.hpp"
#include "relu_recover/rng.hpp"
#include "relu_recover/teacher.hpp"
#include "relu_recover/theory_checks.hpp"
#include "relu_recover/training.hpp"
