#pragma once

#include "sbd/classify.hpp"
#include "sbd/dataprep.hpp"
#include "sbd/error.hpp"
#include "sbd/evaluate.hpp"
#include "sbd/events.hpp"
#include "sbd/frame.hpp"
#include "sbd/gbdt.hpp"
#include "sbd/histogram.hpp"
#include "sbd/metrics.hpp"
#include "sbd/netpbm.hpp"
#include "sbd/rng.hpp"
#include "sbd/synthkit.hpp"
#include "sbd/train.hpp"
#include "sbd/y4m.hpp"
