#pragma once

// Umbrella header.

#include "apnet/attention_export.hpp"
#include "apnet/checkpoint.hpp"
#include "apnet/cli.hpp"
#include "apnet/conv.hpp"
#include "apnet/dataset.hpp"
#include "apnet/embedding.hpp"
#include "apnet/error.hpp"
#include "apnet/eval.hpp"
#include "apnet/grad_check.hpp"
#include "apnet/lstm.hpp"
#include "apnet/mat.hpp"
#include "apnet/model.hpp"
#include "apnet/model_gradcheck.hpp"
#include "apnet/pooling.hpp"
#include "apnet/rng.hpp"
#include "apnet/train.hpp"
