#pragma once

#include "btristd/btr.hpp"
#include "btristd/correlation.hpp"
#include "btristd/error.hpp"
#include "btristd/evaluation.hpp"
#include "btristd/io.hpp"
#include "btristd/linalg.hpp"
#include "btristd/patch.hpp"
#include "btristd/pipeline.hpp"
#include "btristd/solver.hpp"
#include "btristd/synth.hpp"
#include "btristd/tensor.hpp"
