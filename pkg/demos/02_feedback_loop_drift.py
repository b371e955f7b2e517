# Recommendation campaigns drift the item marginals, so the offline score
# of a FIXED recommender moves over time. This reproduces that effect on
# the synthetic S1 scenario and renders the two drifting score curves.

from pathlib import Path

import reweval as rw
from reweval import io
from reweval.charts import render_series

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

# 2000 users, 300 items, organic additions, two campaigns (days 330, 430)
# pushing the same five items to 60% of users.
scenario = rw.scenario_s1()
log = rw.build_scenario(scenario)
print(f"simulated {len(log)} events over {scenario.horizon} days")

model = rw.ProbabilityModel()
snap300 = rw.build_snapshot(log, 300)
marg300 = rw.item_marginal(snap300, model)
marg500 = rw.item_marginal(rw.build_snapshot(log, 500), model)

print("\ncampaign item marginals, day 300 vs day 500:")
for item in rw.S1_CAMPAIGN_ITEMS:
    print(f"  {item}: {marg300.prob(item):.5f} -> {marg500.prob(item):.5f}")

# g1 recommends exactly the campaign items ("agrees" with the campaigns);
# g2 recommends the five most popular non-campaign items as of day 300.
g1 = rw.ConstantRecommender(rw.S1_CAMPAIGN_ITEMS)
popular = sorted(
    (i for i in marg300.probs if i not in rw.S1_CAMPAIGN_ITEMS),
    key=lambda i: (-marg300.prob(i), i),
)
g2 = rw.ConstantRecommender(tuple(popular[:5]))

times = list(range(300, 501, 10))
curve1 = rw.timeline_evaluate(g1, log, times, model)
curve2 = rw.timeline_evaluate(g2, log, times, model)

print(f"\nagreeing   g1 {g1.items}:")
print(f"  score {curve1[0][1].score:.4f} (day 300) -> {curve1[-1][1].score:.4f} (day 500)")
print(f"disagreeing g2 {g2.items}:")
print(f"  score {curve2[0][1].score:.4f} (day 300) -> {curve2[-1][1].score:.4f} (day 500)")

# Both recommenders are constant, yet their measured quality drifts sharply
# after each campaign; the jumps line up with days 330 and 430.
agree_csv = io.write_timeline_csv(curve1, out_dir / "agreeing.csv")
disagree_csv = io.write_timeline_csv(curve2, out_dir / "disagreeing.csv")
svg = render_series([agree_csv, disagree_csv], out_dir / "drift.svg")
print(f"\nwrote {agree_csv}, {disagree_csv}")
print(f"chart: {svg}")
