#pragma once

#include "codes.hpp"
#include "dataset.hpp"
#include "hamming.hpp"
#include "hash_model.hpp"
#include "io.hpp"
#include "matrix.hpp"
#include "metrics.hpp"
#include "optimizer.hpp"
#include "rng.hpp"
