#pragma once

#include "fsk/embedding_store.hpp"
#include "fsk/episode_sampler.hpp"
#include "fsk/error.hpp"
#include "fsk/eval_runner.hpp"
#include "fsk/head_bdc.hpp"
#include "fsk/head_emd.hpp"
#include "fsk/head_laplacian.hpp"
#include "fsk/head_metric.hpp"
#include "fsk/report.hpp"
#include "fsk/results_io.hpp"
#include "fsk/rng.hpp"
#include "fsk/transport.hpp"
#include "fsk/version.hpp"
