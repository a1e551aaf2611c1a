#pragma once

#include "liqlab/dataset.hpp"
#include "liqlab/error.hpp"
#include "liqlab/eval.hpp"
#include "liqlab/liquidity.hpp"
#include "liqlab/models.hpp"
#include "liqlab/pipeline.hpp"
#include "liqlab/sampler.hpp"
#include "liqlab/synth.hpp"
#include "liqlab/tickdata.hpp"
#include "liqlab/timezone.hpp"
