"""Hand-checkable oracle values frozen into the unit tests."""
import math
import statistics

print("logistic(0.8) =", repr(1 / (1 + math.exp(-0.8))))
print("4*exp(-0.5) =", repr(4.0 * math.exp(-0.5)))
print("1 - 1/48 =", repr(1 - 1 / 48))
p = [0.9] + [0.02] * 5
print("zscore(0.9, 0.02x5) =", repr((max(p) - statistics.mean(p)) / statistics.pstdev(p)))
# remaining points by forcing one player to win every point
for best_of in (3, 5):
    print("fresh remaining bo%d =" % best_of, 4 * 6 * ((best_of + 1) // 2))
