#pragma once

// Umbrella header for the tricycle library.

#include "tricycle/image.hpp"
#include "tricycle/shape_prior.hpp"
#include "tricycle/edge_ops.hpp"
#include "tricycle/clahe.hpp"
#include "tricycle/image_io.hpp"
#include "tricycle/preprocess.hpp"
#include "tricycle/augment.hpp"
#include "tricycle/metrics.hpp"
#include "tricycle/torch_interop.hpp"
#include "tricycle/losses.hpp"
#include "tricycle/networks.hpp"
#include "tricycle/model_bundle.hpp"
#include "tricycle/pipeline.hpp"
#include "tricycle/dataset.hpp"
#include "tricycle/config.hpp"
