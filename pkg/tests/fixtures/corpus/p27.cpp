#include <bits/stdc++.h>
using namespace std;
int main() {
  int n, m;
  cin >> n >> m;
  int grid[55][55];
  for (int i = 0; i < n; i++)
    for (int j = 0; j < m; j++) cin >> grid[i][j];
  int best = 0;
  for (int i = 0; i < n; i++) {
    int row = 0;
    for (int j = 0; j < m; j++) row += grid[i][j];
    if (row > best) best = row;
  }
  cout << best << endl;
  return 0;
}
