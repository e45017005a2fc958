//
// PocketFlow - Copyright 2026 The PocketFlow Authors.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "pocketflow/chem_core.hpp"
#include "pocketflow/config.hpp"
#include "pocketflow/dataset.hpp"
#include "pocketflow/encoder.hpp"
#include "pocketflow/errors.hpp"
#include "pocketflow/evaluator.hpp"
#include "pocketflow/flow.hpp"
#include "pocketflow/generator.hpp"
#include "pocketflow/geometry.hpp"
#include "pocketflow/io.hpp"
#include "pocketflow/model.hpp"
#include "pocketflow/params.hpp"
#include "pocketflow/pdb.hpp"
#include "pocketflow/trainer.hpp"
